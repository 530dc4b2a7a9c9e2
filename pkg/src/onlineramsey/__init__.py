"""Online Ramsey games and subgraph query games: simulation, exact solving and bounds."""

__version__ = "0.1.0"
