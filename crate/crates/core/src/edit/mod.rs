//! Model-agnostic editing kernel: attention binding loss, color loss, latent
//! updates and blending, the step schedule, and a small differentiable toy
//! driver for exercising it without a diffusion model.

mod attention;
mod color_loss;
mod driver;
mod latent;
mod run;
mod schedule;
mod segmentation;

pub use attention::{
    attention_loss, jsd, normalize_attention, AttentionLoss, AttentionMap, Jsd, NORMALIZE_EPS,
};
pub use color_loss::{color_loss, ColorLoss, DecodedImage};
pub use driver::{DriverOutput, EditDriver, OutputGradient, ToyConfig, ToyDriver, TOY_TARGETS};
pub use latent::{blend_latents, gradient_step, LatentTensor};
pub use run::{run_edit_schedule, EditOutcome, LossSnapshot, LossTrace, TraceRow};
pub use schedule::{
    total_loss, AttentionWindow, ColorWindow, DriverSettings, EditSchedule, TotalLoss,
};
pub use segmentation::{attention_segmentation, SegmentationConfig, SelfAttention};
