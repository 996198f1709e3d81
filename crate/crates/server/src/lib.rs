//! Stateless JSON front end: every request carries the problem reference and
//! the full list of choices.

pub mod api;
pub mod http;
pub mod report;
pub mod service;

pub use api::{Args, Choice, Op, ProblemRef, Request, Response, Status};
pub use service::Service;
