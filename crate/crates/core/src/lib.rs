#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod dialogue;
pub mod pattern;
pub mod persona;
pub mod personality;
pub mod scoring;
pub mod text;

#[cfg(any(test, feature = "oracle"))]
pub mod oracle;
