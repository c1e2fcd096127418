"""Min-heaps with decrease-key built on violation caches and rank
registries, in meldable and non-meldable variants, each public method
available with amortized or worst-case reduction scheduling."""

from .accounting import (
    OpCounters, PhiSnapshot, PotentialLedger, compute_phi, ledger_state,
    max_rank_bound,
)
from .core import (
    AMORTIZED, SIMPLE, WORSTCASE, POLICIES,
    DRAIN_ALL, LEDGER_DRIVEN,
    EmptyHeapError, HeapError, KeyIncreaseError, Node, NoMeldHeap,
    RankRegistry, RetiredHeapError, SelfMeldError, StaleNodeError,
    make_heap,
)
from .meld import MeldHeap
from .verify import (
    AFTER_AMORTIZED, ANY_TIME, CheckReport, FuzzDivergence, OracleHeap,
    check_ownership, check_structure, fuzz_run,
    meld_degree_bound, nomeld_degree_bound,
)

__all__ = [
    "AMORTIZED", "WORSTCASE", "SIMPLE", "POLICIES",
    "DRAIN_ALL", "LEDGER_DRIVEN",
    "AFTER_AMORTIZED", "ANY_TIME",
    "CheckReport", "EmptyHeapError", "FuzzDivergence", "HeapError",
    "KeyIncreaseError", "MeldHeap", "Node", "NoMeldHeap", "OpCounters",
    "OracleHeap", "PhiSnapshot", "PotentialLedger", "RankRegistry",
    "RetiredHeapError", "SelfMeldError", "StaleNodeError",
    "check_ownership", "check_structure", "compute_phi", "fuzz_run",
    "ledger_state", "make_heap", "max_rank_bound",
    "meld_degree_bound", "nomeld_degree_bound",
]

__version__ = "0.1.0"
