"""mbf: exact workbench for matrix bi-factorisations of x^d - y^d and the
matching minimal-model fusing data, with a cross-verification layer."""

__version__ = "0.1.0"
