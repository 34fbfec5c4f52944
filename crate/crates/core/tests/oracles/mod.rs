#![allow(dead_code)]
pub mod brown;
pub mod gibbs;
