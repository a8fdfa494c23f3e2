"""Gap edit distance: the k-level speed-up, its tower, and FAED upper bounds,
with exact oracles for checking every certified structure."""
from .core_strings import (SENTINEL, GapDecision, GridBox, Interval, Text, banded_edit_distance,
                           base_gap_decide, box_cost, displacement, exact_edit_distance, ncost)
from .intervals import (Stack, WeightedBox, aligned_family, induced, round_interval, zoom_in,
                        zoom_in_stack)
from .shortcut_graph import apm, cost_via_shortcuts_oracle, partition_by_horizontal
from .parameters import LevelParams, ScheduleInfeasible, derive_schedule, quality_sequence
from .engine import BudgetExceeded, GapEngine, ThetaInadmissible, main_gap, run_gap
from .driver import (amplify, budgeted_run, build_tower, faed, pad_to_power_of_two)
from .cli import generate_pair

__all__ = [
    "SENTINEL", "GapDecision", "GridBox", "Interval", "Text", "banded_edit_distance",
    "base_gap_decide", "box_cost", "displacement", "exact_edit_distance", "ncost",
    "Stack", "WeightedBox", "aligned_family", "induced", "round_interval", "zoom_in", "zoom_in_stack",
    "apm", "cost_via_shortcuts_oracle", "partition_by_horizontal",
    "LevelParams", "ScheduleInfeasible", "derive_schedule", "quality_sequence",
    "BudgetExceeded", "GapEngine", "ThetaInadmissible", "main_gap", "run_gap",
    "amplify", "budgeted_run", "build_tower", "faed", "pad_to_power_of_two", "generate_pair",
]
