#!/usr/bin/env python

# SPDX-FileCopyrightText: © 2024 Stacey Adams <stacey.belle.rose@gmail.com>
# SPDX-License-Identifier: MIT

"""
Setup script.
"""

from setuptools import setup

if __name__ == "__main__":
    setup()
