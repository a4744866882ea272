"""Local hidden variable models of singlet and Franson correlations."""

__version__ = "0.1.0"
