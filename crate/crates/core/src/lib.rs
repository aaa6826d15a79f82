pub mod algebroid;
pub mod atiyah;
pub mod catalog;
pub mod curved;
pub mod deform;
pub mod dg;
pub mod liepair;
pub mod exact;
pub mod tot;
