import json
from pathlib import Path

import pytest

from sheetqa.table import Table, parse_table

FIXTURES = Path(__file__).parent / "fixtures"
GOLDEN = Path(__file__).parent / "golden"

AGRI_TITLE = "agri-food industry sub-groups for workers aged 15 years and over, 2011"

AGRI_ROWS = [
    ["sub-groups of agri-food", "eastern ontario", "eastern ontario", "northern ontario", "northern ontario"],
    ["sub-groups of agri-food", "french workers", "other workers", "french workers", "other workers"],
    ["sub-groups of agri-food", "percent", "percent", "percent", "percent"],
    ["input and service supply", "2.9", "2.1", "2.9", "1.3"],
    ["food, beverage, and tobacco processing", "9.7", "6.0", "3.0", "3.3"],
    ["food retail and wholesale", "35.3", "31.3", "39.1", "37.3"],
    ["food service", "52.1", "60.6", "55.0", "58.1"],
]


@pytest.fixture
def agri_table() -> Table:
    return Table.from_rows(AGRI_ROWS, title=AGRI_TITLE, header_rows=3)


@pytest.fixture
def agri_json_path(tmp_path) -> str:
    path = tmp_path / "agri.json"
    path.write_text(
        json.dumps({"title": AGRI_TITLE, "header_rows": 3, "cells": AGRI_ROWS})
    )
    return str(path)


def make_table(rows, **kwargs) -> Table:
    return Table.from_rows([[str(v) for v in row] for row in rows], **kwargs)


def parse_markdown(src: str, **kwargs) -> Table:
    return parse_table(src, "markdown", **kwargs)
