//! Minimal SVG line charts.
