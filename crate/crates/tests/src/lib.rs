//! Holds the workspace acceptance suite under `tests/`; no library code.
