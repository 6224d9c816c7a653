"""Twisted wreath products: construction, base size and distinguishing number."""

from .perm import Perm, format_cycles, format_images, parse_perm
from .group import PermGroup, Unknown
from .grouptable import GroupTable, named_table
from .twisted import TwistData, TwistError, build

__all__ = [
    "Perm",
    "format_cycles",
    "format_images",
    "parse_perm",
    "PermGroup",
    "Unknown",
    "GroupTable",
    "named_table",
    "TwistData",
    "TwistError",
    "build",
]
