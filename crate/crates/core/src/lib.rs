pub mod app;
pub mod catalog;
pub mod chain;
pub mod config;
pub mod export;
pub mod identify;
pub mod levels;
pub mod library;
pub mod model;
pub mod normalize;
pub mod nucdata;
