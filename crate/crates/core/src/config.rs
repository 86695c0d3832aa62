//! Configuration parsing (stub).
