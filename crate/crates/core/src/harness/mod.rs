//! Front-end plumbing: the command driver shared by every front end, the
//! live-session message protocol, a text renderer and the latency simulator.

pub mod driver;
pub mod protocol;
pub mod render;
pub mod sim;

pub use driver::{CommandFailure, Driver, Outcome};
pub use protocol::{ClientMessage, Connection, ServerMessage, StateSnapshot};
pub use sim::{simulate, AuditScript, AuditTask, LatencyProfile, SimReport};
