//! Holds the `acceptance` test target (`tests/acceptance.rs`), which prints
//! one PASS/FAIL line per acceptance criterion. Run it alone with
//! `cargo test -p cir-sldp-validation --test acceptance`; set
//! `ACCEPTANCE_ONLY=<n>` to run a single criterion.
