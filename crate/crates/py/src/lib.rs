use pyo3::prelude::*;

#[pymodule]
fn wbc_arena_py(_m: &Bound<'_, PyModule>) -> PyResult<()> {
    Ok(())
}
