"""Session-typed π-calculus with priorities, and a translation from a functional language.

The main entry points are re-exported here; the CLI lives in :mod:`sessio.cli`.
"""

from sessio.apcp import check_apcp
from sessio.checker import check_acp, check_ap
from sessio.congruence import congruent, normalize
from sessio.parser import parse_context, parse_process, parse_type
from sessio.process import show
from sessio.reduction import explore, run
from sessio.translation import check_soundness, trans_config, trans_term, trans_type
from sessio.types import dual, show_type

__all__ = [
    "check_ap", "check_acp", "check_apcp", "congruent", "normalize", "parse_context", "parse_process",
    "parse_type", "show", "explore", "run", "check_soundness", "trans_config", "trans_term", "trans_type",
    "dual", "show_type",
]
