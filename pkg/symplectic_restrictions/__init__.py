"""Symplectic Restrictions - algebraic restrictions and symplectic classification of curve germs."""

__version__ = "1.0.0"
