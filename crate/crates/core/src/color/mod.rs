//! Color spaces and perceptual color differences.

mod delta_e;
mod named;
mod space;

pub use delta_e::{delta_e_76, delta_e_cmc, CmcRatio};
pub use named::{
    all_colors, final_color_set, named_color_lookup, normalize_name, render_name, try_lookup,
    NameStyle, NamedColor, FINAL_COLOR_NAMES,
};
pub use space::{
    lab_to_rgb_f64, lab_to_srgb, rgb_f64_to_lab, srgb_to_lab, GamutResult, LabColor, SrgbColor,
};
