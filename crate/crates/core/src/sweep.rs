//! Parameter sweeps (stub).
