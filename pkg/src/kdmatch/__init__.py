"""Online b-matching on (k,d)-graphs with exact competitive-ratio tooling."""

from .adversary import run_adversary, run_adversary_variable, verify_transcript
from .engine import Matcher, make_policy, run_stream
from .instance import Instance, RequestArrival, Server, random_instance, read_instance, write_instance
from .offline import has_perfect_b_matching, max_b_matching, max_weight_b_matching
from .ratio import Params, competitive_ratio, min_competitive_ratio
from .table import build_table, get_table

__version__ = "0.1.0"

__all__ = [
    "Instance",
    "Matcher",
    "Params",
    "RequestArrival",
    "Server",
    "build_table",
    "competitive_ratio",
    "get_table",
    "has_perfect_b_matching",
    "make_policy",
    "max_b_matching",
    "max_weight_b_matching",
    "min_competitive_ratio",
    "random_instance",
    "read_instance",
    "run_adversary",
    "run_adversary_variable",
    "run_stream",
    "verify_transcript",
    "write_instance",
]
