//! Placeholder; corpus runner, callback translation, and bench land here.
