"""Workbench for recurrent distributed graph problems with a preprocessing stage."""

__version__ = "0.1.0"
