//! Test-only package holding the `acceptance` target. It is a separate package so it runs
//! after the other suites of the workspace.
