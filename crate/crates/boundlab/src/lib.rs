pub mod attn;
pub mod bitnum;
pub mod constructs;
pub mod lintens;
pub mod oracle;
pub mod commsim;
pub mod quantlab;
