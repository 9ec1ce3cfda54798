"""NYoSh: a textual workbench for a composable scripting language.

Scripts parse into an immutable AST, are statically checked against their
design-time environment, run with BASH-equivalent pipeline semantics and step
logging, and package into deployable plugin directories.  Raw BASH fragments
import through micro-parsing intentions.
"""

from . import ast, checker, codegen, envsource, executor, microparse, parser

__version__ = "0.1.0"

__all__ = [
    "ast",
    "checker",
    "codegen",
    "envsource",
    "executor",
    "microparse",
    "parser",
    "__version__",
]
