use std::collections::HashSet;
use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Reads keys as newline-delimited hex, or as fixed-width raw records.
/// Blank lines are skipped in hex mode.
pub fn read_keys(path: &Path, raw: bool, key_bytes: usize) -> Result<Vec<Vec<u8>>, String> {
    let data =
        fs::read(path).map_err(|e| format!("cannot read keys file {}: {e}", path.display()))?;
    if raw {
        if key_bytes == 0 {
            return Err("--key-bytes must be at least 1".into());
        }
        if data.len() % key_bytes != 0 {
            return Err(format!(
                "raw keys file has {} bytes, not a multiple of --key-bytes {key_bytes}",
                data.len()
            ));
        }
        return Ok(data.chunks_exact(key_bytes).map(<[u8]>::to_vec).collect());
    }
    let text =
        String::from_utf8(data).map_err(|_| "keys file is not UTF-8 hex text".to_string())?;
    let mut keys = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        keys.push(hex::decode(line).map_err(|e| format!("keys file line {}: {e}", i + 1))?);
    }
    Ok(keys)
}

/// `count` distinct uniform 8-byte keys, little-endian.
pub fn random_keys(count: usize, seed: u64) -> (Vec<[u8; 8]>, HashSet<u64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut members = HashSet::with_capacity(count);
    let mut keys = Vec::with_capacity(count);
    while keys.len() < count {
        let k: u64 = rng.gen();
        if members.insert(k) {
            keys.push(k.to_le_bytes());
        }
    }
    (keys, members)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    #[test]
    fn hex_and_raw() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "00ff\n\n  0102  \nabcdef").unwrap();
        let keys = read_keys(f.path(), false, 8).unwrap();
        assert_eq!(keys, vec![vec![0, 255], vec![1, 2], vec![0xab, 0xcd, 0xef]]);
        let keys = read_keys(f.path(), true, 1).unwrap();
        assert_eq!(keys.len(), fs::metadata(f.path()).unwrap().len() as usize);
        assert!(read_keys(f.path(), true, 0).is_err());
    }

    #[test]
    fn bad_inputs() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "00\nzz").unwrap();
        assert!(read_keys(f.path(), false, 8)
            .unwrap_err()
            .contains("line 2"));
        assert!(read_keys(f.path(), true, 4).is_err());
        assert!(read_keys(Path::new("/nonexistent/keys"), false, 8).is_err());
    }

    #[test]
    fn random_keys_are_distinct_and_seeded() {
        let (a, set) = random_keys(1000, 5);
        assert_eq!(set.len(), 1000);
        assert_eq!(a, random_keys(1000, 5).0);
        assert_ne!(a, random_keys(1000, 6).0);
    }
}
