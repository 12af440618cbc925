//! Failure localization in time: earliest divergence, a clocked window of
//! the waveform, the shift-alignment hint and the trace report.

mod report;
mod value;
mod vcd;
mod window;

pub use report::{
    build_report, ExpectedSource, FailingSignal, ReportError, ReportInputs, SuspectBlock,
    TraceReport,
};
pub use value::{FourStateValue, Logic};
pub use vcd::{parse_vcd, render_vcd, VcdDb, VcdError, VcdVar};
pub use window::{
    active_edges, alignment_check, extract_window, first_divergence, shift_score,
    AlignmentHint, NoDivergence, TraceWindow, WindowError, WindowWarning, SHIFTS,
};
