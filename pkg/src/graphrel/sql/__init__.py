from . import ast
from .parser import parse, parse_expression, parse_script, split_script
from .printer import to_sql

__all__ = ["ast", "parse", "parse_expression", "parse_script", "split_script", "to_sql"]
