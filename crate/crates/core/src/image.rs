//! Single-band image plane used by all per-band kernels.

/// Row-major `height × width` grid of `f64` samples.
#[derive(Debug, Clone, PartialEq)]
pub struct Plane {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl Plane {
    /// Panics if `data.len() != width * height`.
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), width * height, "plane size mismatch");
        Self {
            width,
            height,
            data,
        }
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Self {
        Self::new(width, height, vec![value; width * height])
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self::new(width, height, data)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: f64) {
        self.data[y * self.width + x] = v;
    }

    /// Sample with edge replication for out-of-range coordinates.
    #[inline]
    pub fn get_clamped(&self, x: isize, y: isize) -> f64 {
        let cx = x.clamp(0, self.width as isize - 1) as usize;
        let cy = y.clamp(0, self.height as isize - 1) as usize;
        self.get(cx, cy)
    }

    /// Bilinear sample at a real-valued position, edge replicated.
    ///
    /// Written in lerp form so that equal neighbours reproduce their value
    /// exactly.
    pub fn sample_bilinear(&self, x: f64, y: f64) -> f64 {
        let x0 = x.floor();
        let y0 = y.floor();
        let fx = x - x0;
        let fy = y - y0;
        let (ix, iy) = (x0 as isize, y0 as isize);
        let a = self.get_clamped(ix, iy);
        let b = self.get_clamped(ix + 1, iy);
        let c = self.get_clamped(ix, iy + 1);
        let d = self.get_clamped(ix + 1, iy + 1);
        let top = a + fx * (b - a);
        let bottom = c + fx * (d - c);
        top + fy * (bottom - top)
    }

    pub fn min_max(&self) -> (f64, f64) {
        self.data
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            })
    }

    /// Central-difference gradients `(gx, gy)` with edge replication.
    ///
    /// `gx = I(x+1, y) - I(x-1, y)` and `gy = I(x, y+1) - I(x, y-1)`; the y
    /// axis points down, so orientations are measured clockwise on screen.
    pub fn gradients(&self) -> (Vec<f64>, Vec<f64>) {
        let mut gx = vec![0.0; self.data.len()];
        let mut gy = vec![0.0; self.data.len()];
        for y in 0..self.height {
            for x in 0..self.width {
                let (xi, yi) = (x as isize, y as isize);
                let i = y * self.width + x;
                gx[i] = self.get_clamped(xi + 1, yi) - self.get_clamped(xi - 1, yi);
                gy[i] = self.get_clamped(xi, yi + 1) - self.get_clamped(xi, yi - 1);
            }
        }
        (gx, gy)
    }
}
