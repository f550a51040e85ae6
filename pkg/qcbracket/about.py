# SPDX-FileCopyrightText: © 2024 Stacey Adams <stacey.belle.rose@gmail.com>
# SPDX-License-Identifier: MIT

"""
Metadata about the package (name, version, author, license, etc.).
"""

__app_name__ = "qcbracket"
__version__ = "0.1.0"
__license__ = "MIT License"
__author_name__ = "Stacey Adams"
__author_email__ = "stacey.belle.rose@gmail.com"
__url__ = "https://github.com/staceybellerose/qcbracket"
__summary__ = """\
qcbracket computes with phase-space symbols: Moyal and Kohn-Nirenberg star \
products, the quantum-classical bracket and its identities, grid Weyl \
kernels, and mixed quantum-classical propagation in three schemes, checked \
against an analytic coupled oscillator."""
__keywords__ = "Python / 3, Science, Physics, Quantum-classical dynamics, Alpha"
__copyright_year__ = "2024"
__license_url__ = "https://opensource.org/licenses/MIT"
