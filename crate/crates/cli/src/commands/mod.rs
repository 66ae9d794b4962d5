pub mod bench;
pub mod fit;
pub mod gradcheck;
pub mod replay;
pub mod synth;
pub mod varcompare;
