#![allow(dead_code)]

pub mod lindblad;
