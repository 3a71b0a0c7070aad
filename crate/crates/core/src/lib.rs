pub mod hermitian;
