"""Instrumented single- and dual-pivot Quickselect with exact and limiting cost laws."""

from .select_core import (ContractError, CostTally, PartitionOutcome, SelectionTask,
                          partition_classic, partition_yaroslavskiy, quickselect_classic,
                          quickselect_dual, select)

__all__ = [
    "ContractError",
    "CostTally",
    "PartitionOutcome",
    "SelectionTask",
    "partition_classic",
    "partition_yaroslavskiy",
    "quickselect_classic",
    "quickselect_dual",
    "select",
]
__version__ = "0.1.0"
