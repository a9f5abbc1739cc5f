from __future__ import annotations

from pathlib import Path

import pytest

from eirkit import parse_module

ROOT = Path(__file__).resolve().parent.parent
CORPUS = ROOT / "corpus"
DATA = Path(__file__).resolve().parent / "data"
CORPUS_NAMES = ("ghz", "ghz_rc", "wirecut_qaoa", "rx_sweep")


def corpus_text(name: str) -> str:
    return (CORPUS / f"{name}.eir").read_text(encoding="utf-8")


@pytest.fixture(params=CORPUS_NAMES)
def corpus_name(request) -> str:
    return request.param


@pytest.fixture
def ghz_program():
    return parse_module(corpus_text("ghz"))


@pytest.fixture
def ghz_rc_program():
    return parse_module(corpus_text("ghz_rc"))
