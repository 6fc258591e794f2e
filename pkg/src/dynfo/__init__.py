"""Dynamic evaluation of first-order queries with counting on degree-bounded databases.

The ``Engine`` keeps a database together with everything needed to answer a
query in Hanf normal form after each single-tuple update: the Boolean answer,
membership tests, the number of results and a constant-delay enumeration.
"""

from .database import Database, Outcome, Schema, UpdateCmd
from .engine import ActiveEnumeration, Engine, OracleSession
from .enumeration import END
from .logic import FoQuery, HnfQuery, ParseError, eval_query_oracle, parse_query
from .nbtypes import NeighborhoodType, type_of

__all__ = [
    "ActiveEnumeration", "Database", "END", "Engine", "FoQuery", "HnfQuery", "NeighborhoodType",
    "OracleSession", "Outcome", "ParseError", "Schema", "UpdateCmd", "eval_query_oracle",
    "parse_query", "type_of",
]
