//! Column reduction of a filtered boundary matrix over the two-element field.

/// A reduced filtration: index pairs `(birth, death)` and unpaired births.
///
/// Indices refer to positions in the filtration order that was passed in.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Reduction {
    pub pairs: Vec<(u32, u32)>,
    pub essentials: Vec<u32>,
}

/// Symmetric difference of two ascending index lists.
fn add_column(target: &mut Vec<u32>, other: &[u32], scratch: &mut Vec<u32>) {
    scratch.clear();
    let (mut i, mut j) = (0, 0);
    while i < target.len() && j < other.len() {
        match target[i].cmp(&other[j]) {
            std::cmp::Ordering::Less => {
                scratch.push(target[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                scratch.push(other[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    scratch.extend_from_slice(&target[i..]);
    scratch.extend_from_slice(&other[j..]);
    std::mem::swap(target, scratch);
}

/// Standard left-to-right reduction with clearing.
///
/// `boundaries[j]` lists the faces of cell `j` as ascending positions, all
/// smaller than `j`. Dimensions are processed from the top down so that
/// columns of cells already known to be paired are skipped.
pub fn reduce(dims: &[u8], mut boundaries: Vec<Vec<u32>>) -> Reduction {
    let n = dims.len();
    assert_eq!(boundaries.len(), n);
    let max_dim = dims.iter().copied().max().unwrap_or(0);
    let mut pivot_owner: Vec<u32> = vec![u32::MAX; n];
    let mut cleared = vec![false; n];
    let mut negative = vec![false; n];
    let mut scratch = Vec::new();
    let mut pairs = Vec::new();
    for d in (0..=max_dim).rev() {
        for j in 0..n {
            if dims[j] != d || cleared[j] {
                continue;
            }
            let mut col = std::mem::take(&mut boundaries[j]);
            while let Some(&low) = col.last() {
                let owner = pivot_owner[low as usize];
                if owner == u32::MAX {
                    break;
                }
                add_column(&mut col, &boundaries[owner as usize], &mut scratch);
            }
            if let Some(&low) = col.last() {
                pivot_owner[low as usize] = j as u32;
                cleared[low as usize] = true;
                negative[j] = true;
                pairs.push((low, j as u32));
            }
            boundaries[j] = col;
        }
    }
    let essentials = (0..n as u32)
        .filter(|&i| !negative[i as usize] && pivot_owner[i as usize] == u32::MAX)
        .collect();
    pairs.sort_unstable();
    Reduction { pairs, essentials }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triangle_boundary_has_one_loop() {
        // Vertices 0,1,2, edges 3=(0,1), 4=(1,2), 5=(0,2).
        let dims = [0, 0, 0, 1, 1, 1];
        let b = vec![vec![], vec![], vec![], vec![0, 1], vec![1, 2], vec![0, 2]];
        let r = reduce(&dims, b);
        assert_eq!(r.pairs, vec![(1, 3), (2, 4)]);
        assert_eq!(r.essentials, vec![0, 5]);
    }

    #[test]
    fn filled_triangle_is_contractible() {
        let dims = [0, 0, 0, 1, 1, 1, 2];
        let b = vec![vec![], vec![], vec![], vec![0, 1], vec![1, 2], vec![0, 2], vec![3, 4, 5]];
        let r = reduce(&dims, b);
        assert_eq!(r.essentials, vec![0]);
        assert_eq!(r.pairs.len(), 3);
        assert!(r.pairs.contains(&(5, 6)));
    }

    #[test]
    fn column_addition_is_symmetric_difference() {
        let mut a = vec![1, 3, 5];
        let mut s = Vec::new();
        add_column(&mut a, &[3, 4], &mut s);
        assert_eq!(a, vec![1, 4, 5]);
    }
}
