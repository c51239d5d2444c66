use std::fmt;

/// Main intersection id. Sub-intersections are 1 (south), 2 (east), 3 (north), 4 (west).
pub const MAIN: usize = 5;
pub const INTERSECTIONS: [usize; 5] = [1, 2, 3, 4, 5];
pub const MOVEMENTS: [usize; 8] = [1, 2, 3, 4, 5, 6, 7, 8];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MovementKind {
    Through,
    /// Displaced right turn, crossing over at its approach sub-intersection.
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Phase {
    A,
    B,
}

impl Phase {
    pub fn index(self) -> usize {
        match self {
            Phase::A => 0,
            Phase::B => 1,
        }
    }

    pub fn other(self) -> Phase {
        match self {
            Phase::A => Phase::B,
            Phase::B => Phase::A,
        }
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Phase::A => "A",
            Phase::B => "B",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PairKind {
    CrossoverToMain,
    MainToExit,
    CrossoverToExit,
}

/// Consecutive (or, for right turns, end-to-end) intersections passed by a movement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pair {
    pub from: usize,
    pub to: usize,
    pub kind: PairKind,
    /// Travel time in seconds.
    pub travel_time: f64,
    /// Storage between the two stop lines, in vehicles.
    pub storage: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Movement {
    pub id: usize,
    pub kind: MovementKind,
    pub path: Vec<usize>,
    pub pairs: Vec<Pair>,
    /// Storage upstream of the first stop line, in vehicles.
    pub stopline_capacity: f64,
}

impl Movement {
    pub fn first(&self) -> usize {
        self.path[0]
    }

    pub fn is_through(&self) -> bool {
        self.kind == MovementKind::Through
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MovementTable {
    movements: Vec<Movement>,
    groups: [[Vec<usize>; 2]; 5],
}

pub const TRAVEL_CROSSOVER_MAIN: f64 = 15.0;
pub const TRAVEL_MAIN_EXIT: f64 = 11.0;
pub const TRAVEL_CROSSOVER_EXIT: f64 = 26.0;
pub const STORAGE_CROSSOVER_MAIN: f64 = 10.0;
pub const STORAGE_MAIN_EXIT: f64 = 30.0;
pub const STORAGE_RIGHT_BAY: f64 = 9.0;

/// Rotates a movement id by one approach (90 degrees).
pub fn rotate_movement(i: usize) -> usize {
    (i + 1) % 8 + 1
}

/// Rotates an intersection id together with [`rotate_movement`]; the main intersection is fixed.
pub fn rotate_intersection(l: usize) -> usize {
    if l == MAIN {
        MAIN
    } else {
        l % 4 + 1
    }
}

pub fn build_topology() -> MovementTable {
    // (movement, crossover sub or none, exit sub)
    let layout: [(usize, Option<usize>, usize); 8] = [
        (1, None, 3),
        (2, Some(1), 2),
        (3, None, 4),
        (4, Some(2), 3),
        (5, None, 1),
        (6, Some(3), 4),
        (7, None, 2),
        (8, Some(4), 1),
    ];
    let movements = layout
        .iter()
        .map(|&(id, crossover, exit)| match crossover {
            None => Movement {
                id,
                kind: MovementKind::Through,
                path: vec![MAIN, exit],
                pairs: vec![Pair {
                    from: MAIN,
                    to: exit,
                    kind: PairKind::MainToExit,
                    travel_time: TRAVEL_MAIN_EXIT,
                    storage: STORAGE_MAIN_EXIT,
                }],
                stopline_capacity: STORAGE_MAIN_EXIT,
            },
            Some(x) => Movement {
                id,
                kind: MovementKind::Right,
                path: vec![x, MAIN, exit],
                pairs: vec![
                    Pair {
                        from: x,
                        to: MAIN,
                        kind: PairKind::CrossoverToMain,
                        travel_time: TRAVEL_CROSSOVER_MAIN,
                        storage: STORAGE_CROSSOVER_MAIN,
                    },
                    Pair {
                        from: MAIN,
                        to: exit,
                        kind: PairKind::MainToExit,
                        travel_time: TRAVEL_MAIN_EXIT,
                        storage: STORAGE_MAIN_EXIT,
                    },
                    Pair {
                        from: x,
                        to: exit,
                        kind: PairKind::CrossoverToExit,
                        travel_time: TRAVEL_CROSSOVER_EXIT,
                        storage: STORAGE_CROSSOVER_MAIN.min(STORAGE_MAIN_EXIT),
                    },
                ],
                stopline_capacity: STORAGE_RIGHT_BAY,
            },
        })
        .collect();
    let groups = [
        [vec![2], vec![5, 8]],
        [vec![4], vec![2, 7]],
        [vec![6], vec![1, 4]],
        [vec![8], vec![3, 6]],
        [vec![1, 2, 5, 6], vec![3, 4, 7, 8]],
    ];
    MovementTable { movements, groups }
}

impl MovementTable {
    pub fn movement(&self, i: usize) -> &Movement {
        &self.movements[i - 1]
    }

    pub fn movements(&self) -> &[Movement] {
        &self.movements
    }

    pub fn path(&self, i: usize) -> &[usize] {
        &self.movement(i).path
    }

    pub fn first(&self, i: usize) -> usize {
        self.movement(i).first()
    }

    pub fn pairs(&self, i: usize) -> &[Pair] {
        &self.movement(i).pairs
    }

    pub fn stopline_capacity(&self, i: usize) -> f64 {
        self.movement(i).stopline_capacity
    }

    /// Phase A group first. At a sub-intersection phase A carries the crossover movement.
    pub fn phase_groups(&self, l: usize) -> (&[usize], &[usize]) {
        let g = &self.groups[l - 1];
        (&g[0], &g[1])
    }

    pub fn group(&self, l: usize, phase: Phase) -> &[usize] {
        &self.groups[l - 1][phase.index()]
    }

    pub fn phase_of(&self, l: usize, i: usize) -> Option<Phase> {
        let g = &self.groups[l - 1];
        if g[0].contains(&i) {
            Some(Phase::A)
        } else if g[1].contains(&i) {
            Some(Phase::B)
        } else {
            None
        }
    }

    /// All (intersection, movement) stop lines, ordered by movement then path position.
    pub fn stop_lines(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.movements
            .iter()
            .flat_map(|m| m.path.iter().map(move |&l| (l, m.id)))
    }

    /// The crossover sub of a right turn, if any.
    pub fn crossover_of(&self, i: usize) -> Option<usize> {
        let m = self.movement(i);
        (m.kind == MovementKind::Right).then(|| m.path[0])
    }
}
