//! Holds the workspace acceptance suite in `tests/acceptance.rs`. Run it with
//! `cargo test -p epicast-tests --test acceptance`.
