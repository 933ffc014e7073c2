"""Business-constraint families and their injection into existing models."""

from lpforge.injection.describe import DISPLAY_NAMES, describe_spec
from lpforge.injection.families import (
    BigM,
    ConstraintBlock,
    VarDecl,
    build_batch_inventory,
    build_cross_period,
    build_human_resource,
    build_setup_time,
    build_split_delivery,
    delivery_count_feasible,
)
from lpforge.injection.inject import inject, inject_with_report
from lpforge.injection.spec import (
    BATCH_INVENTORY,
    CROSS_PERIOD,
    FAMILIES,
    HUMAN_RESOURCE,
    SETUP_TIME,
    SPLIT_DELIVERY,
    BatchParams,
    BigMPolicy,
    CrossPeriodParams,
    DeliveryParams,
    InjectionSpec,
    LaborParams,
    SchedulingContext,
    SetupParams,
    format_config_text,
    parse_config_text,
    spec_from_config,
    spec_to_config,
)

__all__ = [
    "BATCH_INVENTORY", "CROSS_PERIOD", "DISPLAY_NAMES", "FAMILIES", "HUMAN_RESOURCE", "SETUP_TIME", "SPLIT_DELIVERY",
    "BatchParams", "BigM", "BigMPolicy", "ConstraintBlock", "CrossPeriodParams", "DeliveryParams", "InjectionSpec",
    "LaborParams", "SchedulingContext", "SetupParams", "VarDecl",
    "build_batch_inventory", "build_cross_period", "build_human_resource", "build_setup_time",
    "build_split_delivery", "delivery_count_feasible", "describe_spec", "format_config_text", "inject",
    "inject_with_report", "parse_config_text", "spec_from_config", "spec_to_config",
]
