//! Named preset scenarios (stub).
