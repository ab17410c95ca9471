pub mod uc_cases;
pub mod uc_oracle;
