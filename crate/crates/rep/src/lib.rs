//! Files, event log, interview service and HTTP front end for the interviewer.

pub mod eventlog;
pub mod formats;
pub mod service;
pub mod traits;
pub mod http;
pub mod simulate;
pub mod bench;
