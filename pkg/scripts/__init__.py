"""Entry points for the reducer and the simulation lab."""
