//! Library surface of the scenario front end, shared by the binary and the
//! integration/acceptance suites.

pub mod report;
pub mod run;
pub mod scenario;
