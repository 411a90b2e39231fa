pub mod pasting;
pub mod syntax;
pub mod tree;
pub mod insertion;
pub mod ordinal;
pub mod reduction;
pub mod typecheck;
pub mod surface;
pub mod pushout;
