# SPDX-FileCopyrightText: © 2024 Stacey Adams <stacey.belle.rose@gmail.com>
# SPDX-License-Identifier: MIT

"""
Shared fixtures and hypothesis strategies.
"""

from __future__ import annotations

import math
from typing import TYPE_CHECKING

import numpy as np
import pytest
from hypothesis import strategies as st

from qcbracket.symbols import PolySymbol, SymbolContext

if TYPE_CHECKING:
    from collections.abc import Callable
    from pathlib import Path

MIXED = SymbolContext(1, 1)

unit_disk = st.builds(
    lambda r, theta: complex(math.sqrt(r) * math.cos(theta), math.sqrt(r) * math.sin(theta)),
    st.floats(0.0, 1.0),
    st.floats(0.0, 2 * math.pi),
)


@st.composite
def poly_symbols(
    draw: Callable, context: SymbolContext = MIXED, max_degree: int = 3, max_terms: int = 5
) -> PolySymbol:
    """Random sparse symbols with coefficients in the unit disk."""
    n_terms = draw(st.integers(1, max_terms))
    terms = {}
    for _ in range(n_terms):
        size = context.size
        exps = draw(st.lists(st.integers(0, max_degree), min_size=size, max_size=size))
        while sum(exps) > max_degree:
            exps[exps.index(max(exps))] -= 1
        terms[tuple(exps)] = draw(unit_disk)
    return PolySymbol(terms, context)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(12345)


@pytest.fixture(autouse=True)
def isolated_config(tmp_path: Path, monkeypatch: pytest.MonkeyPatch) -> Path:
    """Keep user settings and output directories inside the test's tmp_path."""
    config_home = tmp_path / "config"
    monkeypatch.setenv("XDG_CONFIG_HOME", str(config_home))
    monkeypatch.setenv("HOME", str(tmp_path))
    monkeypatch.delenv("QCBRACKET_OUT_DIR", raising=False)
    return config_home
