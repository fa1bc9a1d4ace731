pub mod bench;
pub mod engine;
pub mod par;
pub mod table;
pub mod terms;
pub mod tree;
