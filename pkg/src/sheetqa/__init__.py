"""Table question answering toolkit built around spreadsheet formulas.

Subpackages and modules:

- ``table``: grid model, cell coercion, and the two pipe-delimited text views
- ``formula``: formula parser, function registry, and evaluation engine
- ``sql2formula``: template-based conversion of restricted SQL to formulas
- ``answers``: answer normalization, denotation scoring, reward functions
- ``voting``: mixed-mode majority voting over answer candidates
- ``prompts`` / ``client`` / ``annotate``: prompt builders, chat-completions
  transport, and the annotation/inference loops
- ``cli``: batch-oriented command line entry point
"""

from sheetqa.cells import CellValue, coerce_cell
from sheetqa.table import Table, parse_table

__all__ = ["CellValue", "coerce_cell", "Table", "parse_table"]

__version__ = "0.1.0"
