"""SIR epidemics on configuration-model graphs near criticality."""

__version__ = "0.1.0"
