#!/usr/bin/env python3

# SPDX-FileCopyrightText: © 2024 Stacey Adams <stacey.belle.rose@gmail.com>
# SPDX-License-Identifier: MIT

"""
Make script for pdoc documentation.
"""

from pathlib import Path

import numpy as np
from numpy.typing import NDArray
from pdoc import doc_types, pdoc, render
from pdoc._compat import formatannotation

for dtype in (np.float64, np.complex128):
    doc_types.simplify_annotation.replacements[
        formatannotation(NDArray[dtype])
    ] = f"numpy.ndarray[{dtype.__name__}]"

doc_types.simplify_annotation.recompile()

here = Path(__file__).parent

render.configure(
    docformat="numpy",
    include_undocumented=False,
    math=True,
)

pdoc(here / ".." / "qcbracket", output_directory=here / "build")
