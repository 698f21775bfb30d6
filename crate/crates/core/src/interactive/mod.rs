//! Interactive track: the scribble robot and the session service that
//! drives it.

pub mod scribble;
pub mod session;
pub mod wire;

pub use scribble::{error_region, robot_scribble, ErrorKind, Scribble, ScribbleError, ScribbleFile};
pub use session::{
    Clock, InteractiveService, ManualClock, RoundRecord, ServiceError, SessionState, SubmitOutcome, SystemClock,
    MAX_ROUNDS, SECONDS_PER_OBJECT,
};
