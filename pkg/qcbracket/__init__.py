# SPDX-FileCopyrightText: © 2024 Stacey Adams <stacey.belle.rose@gmail.com>
# SPDX-License-Identifier: MIT

"""
Quantum-classical brackets on phase space.

`qcbracket.symbols` holds the exact polynomial symbol algebra, `qcbracket.weyl`
the grid correspondence between symbols and operators, `qcbracket.dynamics`
the Liouville-von Neumann, mean-field and multiconfiguration mean-field
propagators, and `qcbracket.oscillator` the analytic coupled oscillator used
as their reference. `qcbracket.cli` ties them together on the command line.
"""
