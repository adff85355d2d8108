//! Consumers for streamed result batches.

use std::io::{self, Write};

use crate::join::{ResultBatch, ResultPair};

/// Receives result batches in order. A failing sink aborts the join after
/// the batch that failed.
pub trait BatchSink {
    fn consume(&mut self, batch: &ResultBatch) -> io::Result<()>;
}

/// Streams pairs to a writer as CSV lines `key,value`, in batch order.
pub struct PairWriter<W: Write> {
    writer: io::BufWriter<W>,
}

impl<W: Write> PairWriter<W> {
    pub fn new(writer: W) -> Self {
        Self {
            writer: io::BufWriter::new(writer),
        }
    }

    /// Flushes and hands back the underlying writer.
    pub fn finish(self) -> io::Result<W> {
        self.writer.into_inner().map_err(|e| e.into_error())
    }
}

impl<W: Write> BatchSink for PairWriter<W> {
    fn consume(&mut self, batch: &ResultBatch) -> io::Result<()> {
        for pair in &batch.pairs {
            writeln!(self.writer, "{},{}", pair.key, pair.value)?;
        }
        Ok(())
    }
}

/// Counts pairs and batches without retaining anything.
#[derive(Default, Debug)]
pub struct CountingSink {
    pub pairs: u64,
    pub batches: u64,
}

impl BatchSink for CountingSink {
    fn consume(&mut self, batch: &ResultBatch) -> io::Result<()> {
        self.pairs += batch.pairs.len() as u64;
        self.batches += 1;
        Ok(())
    }
}

/// Collects every pair in memory. Intended for tests and validation; the
/// whole point of batching is that production sinks do not have to do this.
#[derive(Default, Debug)]
pub struct MemorySink {
    pub pairs: Vec<ResultPair>,
    pub batches: usize,
}

impl MemorySink {
    /// All collected pairs sorted by (key, value). Batches are only sorted
    /// individually, so a global sort is needed before comparing runs.
    pub fn into_sorted_pairs(mut self) -> Vec<ResultPair> {
        self.pairs.sort_unstable();
        self.pairs
    }
}

impl BatchSink for MemorySink {
    fn consume(&mut self, batch: &ResultBatch) -> io::Result<()> {
        self.pairs.extend_from_slice(&batch.pairs);
        self.batches += 1;
        Ok(())
    }
}
