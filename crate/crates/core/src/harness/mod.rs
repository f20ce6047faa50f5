//! Command line, benchmark families and measurement.

pub mod bench;
pub mod cli;
pub mod gen;

/// Terms in the benchmark families get deep (long lists, large numerals),
/// and several term operations recurse on depth. Run `f` on a thread with
/// a stack sized for that.
pub fn with_large_stack<T, F>(f: F) -> T
where
    T: Send + 'static,
    F: FnOnce() -> T + Send + 'static,
{
    const STACK: usize = 1 << 30;
    std::thread::Builder::new()
        .stack_size(STACK)
        .spawn(f)
        .expect("spawn worker thread")
        .join()
        .unwrap_or_else(|e| std::panic::resume_unwind(e))
}
