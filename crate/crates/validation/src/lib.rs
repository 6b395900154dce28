//! Holds the `acceptance` test target, which runs every acceptance criterion
//! against `dmusic-core` and prints one pass/fail line each.
