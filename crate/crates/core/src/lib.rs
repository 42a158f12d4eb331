//! Simulated Tom Thumb: Lévy-flight exploration, stigmergic trails and
//! spike-timing-dependent plasticity on a seeded grid world, with an
//! experiment harness for the cloister benchmark.

pub mod engine;
pub mod gridworld;
pub mod harness;
pub mod levy;
pub mod pgm;
pub mod stdp;
pub mod trailmap;
