#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
Shim for tools that cannot build from pyproject.toml alone.
Project metadata and the dynamo-sim entry point live in pyproject.toml.
"""

from setuptools import setup

if __name__ == "__main__":
    setup()
