//! Placeholder; surface parser and desugarer land here.
