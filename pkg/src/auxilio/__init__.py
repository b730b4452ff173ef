"""Head-mounted assistive mouse: sensing, driver, simulation and evaluation."""

from .actuation import (
    Channel,
    EdgeKind,
    IrBaseline,
    IrSample,
    TwitchDetector,
    TwitchEdge,
    calibrate_ir,
    detect_twitch,
)
from .driver import (
    Button,
    Driver,
    DriverConfig,
    DriverState,
    Mode,
    OutputEvent,
    detect_mode_gesture,
    map_to_screen,
    screen_to_angles,
    smooth,
)
from .evaluation import (
    DegenerateVariance,
    DescriptiveStats,
    FTestResult,
    SusResponse,
    SusSummary,
    TrialRecord,
    TypingMetrics,
    TypingRecord,
    completion_time,
    descriptive_stats,
    f_test,
    levenshtein,
    path_length,
    sus_grade,
    sus_score,
    sus_summary,
    typing_metrics,
)
from .orientation import (
    CalibrationReference,
    CalibrationUnstable,
    FilterConfig,
    GimbalMarginWarning,
    HeadAngles,
    ImuSample,
    MadgwickFilter,
    Quaternion,
    angles_to_quat,
    capture_reference,
    madgwick_update,
    quat_to_yaw_pitch,
)
from .sim import (
    AgentParams,
    NoiseSpec,
    PipelineResult,
    Scenario,
    Segment,
    Target,
    TwitchEvent,
    build_trajectory,
    inverse_imu,
    popper_targets,
    run_pipeline,
    run_popper_experiment,
    scripted_agent,
    synth_twitch,
)
from .wire import (
    ClickFrame,
    FrameDecoder,
    MovementFrame,
    StatusFrame,
    decode_frames,
    encode_frame,
)

__version__ = "0.1.0"
