//! Action representations for dual-arm waypoint commands.
//!
//! A recorded trajectory pairs proprioception (the believed gripper poses in
//! the camera frame) with commanded desired waypoints. Three encodings of
//! those commands are supported:
//!
//! - camera-centric: the absolute desired pose in the camera frame;
//! - tool-centric: the relative pose from the reference-time gripper pose to
//!   the desired pose, expressed in the gripper frame;
//! - hybrid-relative: translation delta in the camera frame paired with
//!   rotation delta in the gripper frame.
//!
//! Relative encodings freeze the reference pose at the chunk start: every
//! step of a chunk is relative to the proprioception at the chunk's
//! reference time, not rolled forward per step.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::se3::{
    apply_hybrid, subtract_hybrid, subtract_se3, HybridDelta, Pose, Rot6D, Se3Error,
};

/// Default jaw angle range in radians, used by dataset validation.
pub const JAW_LIMITS_DEFAULT: (f64, f64) = (0.0, std::f64::consts::FRAC_PI_3);

/// Default chunk horizon.
pub const DEFAULT_CHUNK_SIZE: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ArmSide {
    Left,
    Right,
}

/// A left/right pair of anything per-arm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DualArm<T> {
    pub left: T,
    pub right: T,
}

impl<T> DualArm<T> {
    pub fn new(left: T, right: T) -> Self {
        DualArm { left, right }
    }

    pub fn get(&self, side: ArmSide) -> &T {
        match side {
            ArmSide::Left => &self.left,
            ArmSide::Right => &self.right,
        }
    }

    pub fn map<U>(&self, mut f: impl FnMut(&T) -> U) -> DualArm<U> {
        DualArm {
            left: f(&self.left),
            right: f(&self.right),
        }
    }
}

/// Gripper pose in the camera (endoscope-tip) frame plus jaw opening.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GripperState {
    pub pose: Pose,
    /// Jaw opening angle, radians.
    pub jaw: f64,
}

/// What the robot believes about both grippers at one instant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Proprioception {
    pub left: GripperState,
    pub right: GripperState,
    /// Seconds, nonnegative.
    pub timestamp: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RepresentationKind {
    CameraCentric,
    ToolCentric,
    HybridRelative,
}

impl RepresentationKind {
    /// All kinds in the canonical report row order.
    pub const ALL: [RepresentationKind; 3] = [
        RepresentationKind::CameraCentric,
        RepresentationKind::ToolCentric,
        RepresentationKind::HybridRelative,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            RepresentationKind::CameraCentric => "camera-centric",
            RepresentationKind::ToolCentric => "tool-centric",
            RepresentationKind::HybridRelative => "hybrid-relative",
        }
    }
}

impl std::fmt::Display for RepresentationKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// Per-arm action payload; the variant determines the representation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ActionPayload {
    /// Camera-centric: absolute desired pose in the camera frame.
    Absolute(Pose),
    /// Tool-centric: desired pose relative to the reference gripper frame.
    Relative(Pose),
    /// Hybrid-relative: camera-frame translation, gripper-frame rotation.
    Hybrid(HybridDelta),
}

impl ActionPayload {
    pub fn kind(&self) -> RepresentationKind {
        match self {
            ActionPayload::Absolute(_) => RepresentationKind::CameraCentric,
            ActionPayload::Relative(_) => RepresentationKind::ToolCentric,
            ActionPayload::Hybrid(_) => RepresentationKind::HybridRelative,
        }
    }
}

/// One arm's action at one step: payload plus absolute jaw angle.
///
/// Jaws are never differenced; all representations carry them through.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArmAction {
    pub payload: ActionPayload,
    pub jaw: f64,
}

/// A horizon-length sequence of dual-arm actions sharing one representation.
#[derive(Debug, Clone, PartialEq)]
pub struct ActionChunk {
    kind: RepresentationKind,
    steps: Vec<DualArm<ArmAction>>,
}

impl ActionChunk {
    pub fn new(
        kind: RepresentationKind,
        steps: Vec<DualArm<ArmAction>>,
    ) -> Result<Self, ActionError> {
        if steps.is_empty() {
            return Err(ActionError::EmptyHorizon);
        }
        for step in &steps {
            for action in [&step.left, &step.right] {
                if action.payload.kind() != kind {
                    return Err(ActionError::KindMismatch {
                        expected: kind,
                        found: action.payload.kind(),
                    });
                }
            }
        }
        Ok(ActionChunk { kind, steps })
    }

    pub fn kind(&self) -> RepresentationKind {
        self.kind
    }

    pub fn horizon(&self) -> usize {
        self.steps.len()
    }

    pub fn steps(&self) -> &[DualArm<ArmAction>] {
        &self.steps
    }
}

/// Flat per-step training vector:
/// `[left: dp(3), rot6d(6), jaw(1); right: dp(3), rot6d(6), jaw(1)]`.
///
/// The rot6d block is column one of the rotation matrix followed by column
/// two. This layout is normative for chunk files.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ActionVector20(pub [f64; 20]);

pub const ACTION_DIMS: usize = 20;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ActionError {
    #[error("HorizonOverrun: chunk [{start}, {start}+{horizon}) exceeds command count {len}")]
    HorizonOverrun {
        start: usize,
        horizon: usize,
        len: usize,
    },
    #[error("EmptyHorizon: chunk horizon must be at least 1")]
    EmptyHorizon,
    #[error("KindMismatch: expected {expected}, found {found}")]
    KindMismatch {
        expected: RepresentationKind,
        found: RepresentationKind,
    },
    #[error(transparent)]
    Se3(#[from] Se3Error),
}

fn check_window(
    commands: &[DualArm<GripperState>],
    start: usize,
    horizon: usize,
) -> Result<(), ActionError> {
    if horizon == 0 {
        return Err(ActionError::EmptyHorizon);
    }
    if start.saturating_add(horizon) > commands.len() {
        return Err(ActionError::HorizonOverrun {
            start,
            horizon,
            len: commands.len(),
        });
    }
    Ok(())
}

/// Absolute desired poses, passed through unchanged.
pub fn encode_camera_centric(
    commands: &[DualArm<GripperState>],
    start: usize,
    horizon: usize,
) -> Result<ActionChunk, ActionError> {
    check_window(commands, start, horizon)?;
    let steps = commands[start..start + horizon]
        .iter()
        .map(|cmd| {
            cmd.map(|g| ArmAction {
                payload: ActionPayload::Absolute(g.pose),
                jaw: g.jaw,
            })
        })
        .collect();
    ActionChunk::new(RepresentationKind::CameraCentric, steps)
}

/// Desired poses subtracted by the reference-time gripper pose, per arm.
///
/// The reference pose is the proprioception at `start` for every step of the
/// chunk.
pub fn encode_tool_centric(
    reference: &Proprioception,
    commands: &[DualArm<GripperState>],
    start: usize,
    horizon: usize,
) -> Result<ActionChunk, ActionError> {
    check_window(commands, start, horizon)?;
    let current = DualArm::new(reference.left.pose, reference.right.pose);
    let steps = commands[start..start + horizon]
        .iter()
        .map(|cmd| {
            DualArm::new(
                ArmAction {
                    payload: ActionPayload::Relative(subtract_se3(&current.left, &cmd.left.pose)),
                    jaw: cmd.left.jaw,
                },
                ArmAction {
                    payload: ActionPayload::Relative(subtract_se3(
                        &current.right,
                        &cmd.right.pose,
                    )),
                    jaw: cmd.right.jaw,
                },
            )
        })
        .collect();
    ActionChunk::new(RepresentationKind::ToolCentric, steps)
}

/// Camera-frame translation deltas paired with gripper-frame rotation
/// deltas, relative to the reference-time proprioception.
pub fn encode_hybrid(
    reference: &Proprioception,
    commands: &[DualArm<GripperState>],
    start: usize,
    horizon: usize,
) -> Result<ActionChunk, ActionError> {
    check_window(commands, start, horizon)?;
    let current = DualArm::new(reference.left.pose, reference.right.pose);
    let steps = commands[start..start + horizon]
        .iter()
        .map(|cmd| {
            DualArm::new(
                ArmAction {
                    payload: ActionPayload::Hybrid(subtract_hybrid(
                        &current.left,
                        &cmd.left.pose,
                    )),
                    jaw: cmd.left.jaw,
                },
                ArmAction {
                    payload: ActionPayload::Hybrid(subtract_hybrid(
                        &current.right,
                        &cmd.right.pose,
                    )),
                    jaw: cmd.right.jaw,
                },
            )
        })
        .collect();
    ActionChunk::new(RepresentationKind::HybridRelative, steps)
}

/// Encode `commands[start, start+horizon)` in the requested representation.
pub fn encode(
    kind: RepresentationKind,
    reference: &Proprioception,
    commands: &[DualArm<GripperState>],
    start: usize,
    horizon: usize,
) -> Result<ActionChunk, ActionError> {
    match kind {
        RepresentationKind::CameraCentric => encode_camera_centric(commands, start, horizon),
        RepresentationKind::ToolCentric => encode_tool_centric(reference, commands, start, horizon),
        RepresentationKind::HybridRelative => encode_hybrid(reference, commands, start, horizon),
    }
}

fn expect_kind(chunk: &ActionChunk, expected: RepresentationKind) -> Result<(), ActionError> {
    if chunk.kind != expected {
        return Err(ActionError::KindMismatch {
            expected,
            found: chunk.kind,
        });
    }
    Ok(())
}

fn decode_arm(action: &ArmAction, current: &Pose) -> GripperState {
    let pose = match &action.payload {
        ActionPayload::Absolute(p) => *p,
        ActionPayload::Relative(delta) => current.compose(delta),
        ActionPayload::Hybrid(delta) => apply_hybrid(current, delta),
    };
    GripperState {
        pose,
        jaw: action.jaw,
    }
}

/// Absolute chunks decode to themselves; proprioception is ignored.
pub fn decode_camera_centric(
    chunk: &ActionChunk,
    _reference: &Proprioception,
) -> Result<Vec<DualArm<GripperState>>, ActionError> {
    expect_kind(chunk, RepresentationKind::CameraCentric)?;
    Ok(decode_steps(chunk, &Pose::identity(), &Pose::identity()))
}

pub fn decode_tool_centric(
    chunk: &ActionChunk,
    reference: &Proprioception,
) -> Result<Vec<DualArm<GripperState>>, ActionError> {
    expect_kind(chunk, RepresentationKind::ToolCentric)?;
    Ok(decode_steps(chunk, &reference.left.pose, &reference.right.pose))
}

pub fn decode_hybrid(
    chunk: &ActionChunk,
    reference: &Proprioception,
) -> Result<Vec<DualArm<GripperState>>, ActionError> {
    expect_kind(chunk, RepresentationKind::HybridRelative)?;
    Ok(decode_steps(chunk, &reference.left.pose, &reference.right.pose))
}

fn decode_steps(chunk: &ActionChunk, left: &Pose, right: &Pose) -> Vec<DualArm<GripperState>> {
    chunk
        .steps
        .iter()
        .map(|step| DualArm::new(decode_arm(&step.left, left), decode_arm(&step.right, right)))
        .collect()
}

/// Decode any chunk against the proprioception at its reference time.
pub fn decode(
    chunk: &ActionChunk,
    reference: &Proprioception,
) -> Result<Vec<DualArm<GripperState>>, ActionError> {
    match chunk.kind {
        RepresentationKind::CameraCentric => decode_camera_centric(chunk, reference),
        RepresentationKind::ToolCentric => decode_tool_centric(chunk, reference),
        RepresentationKind::HybridRelative => decode_hybrid(chunk, reference),
    }
}

fn arm_blocks(action: &ArmAction) -> ([f64; 3], Rot6D) {
    match &action.payload {
        ActionPayload::Absolute(p) | ActionPayload::Relative(p) => {
            (p.position.into(), p.rotation.to_six_d())
        }
        ActionPayload::Hybrid(d) => (d.translation.into(), d.rotation.to_six_d()),
    }
}

/// Flatten one dual-arm step into the normative 20-dim layout.
pub fn to_action_vector(step: &DualArm<ArmAction>) -> ActionVector20 {
    let mut out = [0.0; ACTION_DIMS];
    for (arm, offset) in [(&step.left, 0usize), (&step.right, 10)] {
        let (dp, rot) = arm_blocks(arm);
        out[offset..offset + 3].copy_from_slice(&dp);
        out[offset + 3..offset + 9].copy_from_slice(&rot.0);
        out[offset + 9] = arm.jaw;
    }
    ActionVector20(out)
}

/// Rebuild a dual-arm step from the flat layout, orthonormalizing each
/// rot6d block via Gram-Schmidt.
pub fn from_action_vector(
    vector: &ActionVector20,
    kind: RepresentationKind,
) -> Result<DualArm<ArmAction>, ActionError> {
    let mut arms = Vec::with_capacity(2);
    for offset in [0usize, 10] {
        let v = &vector.0;
        let dp = crate::se3::Vec3::new(v[offset], v[offset + 1], v[offset + 2]);
        let mut six = [0.0; 6];
        six.copy_from_slice(&v[offset + 3..offset + 9]);
        let rotation = Rot6D(six).to_rotation()?;
        let payload = match kind {
            RepresentationKind::CameraCentric => ActionPayload::Absolute(Pose::new(dp, rotation)?),
            RepresentationKind::ToolCentric => ActionPayload::Relative(Pose::new(dp, rotation)?),
            RepresentationKind::HybridRelative => ActionPayload::Hybrid(HybridDelta {
                translation: dp,
                rotation,
            }),
        };
        arms.push(ArmAction {
            payload,
            jaw: v[offset + 9],
        });
    }
    let right = arms.pop().expect("two arms");
    let left = arms.pop().expect("two arms");
    Ok(DualArm::new(left, right))
}
