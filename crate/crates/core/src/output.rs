//! Output emission (stub).
