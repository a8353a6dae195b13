"""Collaborative interest-taxonomy curation service.

Core pieces: an axiom-level taxonomy model with tree invariants, an
event-sourced revision log, refactoring planners (merge / bulk move / bulk
annotation edit), a criteria-driven entity tag engine, multilingual display
names, quality lint, per-entity discussions, role-based access, and a
relational export pipeline, all fronted by an HTTP API with a live event
stream.
"""

__version__ = "0.1.0"
