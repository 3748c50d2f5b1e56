"""LDPC codes: parity-check matrices, alist I/O, systematic encoding, BP decoding.

The decoder is a flooding-schedule sum-product decoder in the log domain
(tanh rule via the phi transform), with early termination on a zero syndrome
and message clamping at +/-30.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

LLR_CLAMP = 30.0

# Smallest argument fed to phi(); phi(x) = -log(tanh(x/2)) overflows at 0.
_PHI_EPS = 1e-12


class AlistError(ValueError):
    """Malformed alist input; carries the 1-based line number."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


@dataclass
class ParityCheckMatrix:
    """Sparse binary parity-check matrix H.

    `entries` is an array of (check, variable) index pairs, one per nonzero.
    """

    rows: int
    cols: int
    entries: np.ndarray  # shape (E, 2), int32

    check_idx: np.ndarray = field(init=False, repr=False)
    var_idx: np.ndarray = field(init=False, repr=False)
    column_degrees: np.ndarray = field(init=False, repr=False)
    row_degrees: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        self.entries = np.asarray(self.entries, dtype=np.int32)
        if self.entries.ndim != 2 or self.entries.shape[1] != 2:
            raise ValueError("entries must have shape (E, 2)")
        if self.rows >= self.cols:
            raise ValueError(f"rows ({self.rows}) must be < cols ({self.cols})")
        c, v = self.entries[:, 0], self.entries[:, 1]
        if c.size == 0:
            raise ValueError("empty parity-check matrix")
        if c.min() < 0 or c.max() >= self.rows or v.min() < 0 or v.max() >= self.cols:
            raise ValueError("entry index out of range")
        flat = c.astype(np.int64) * self.cols + v
        if np.unique(flat).size != flat.size:
            raise ValueError("duplicate entries in parity-check matrix")
        self.check_idx = c.copy()
        self.var_idx = v.copy()
        self.column_degrees = np.bincount(v, minlength=self.cols)
        self.row_degrees = np.bincount(c, minlength=self.rows)
        if self.column_degrees.min() < 1:
            raise ValueError("every column must have degree >= 1")
        if self.row_degrees.min() < 2:
            raise ValueError("every row must have degree >= 2")

    @property
    def num_entries(self):
        return self.entries.shape[0]

    @property
    def info_length(self):
        return self.cols - self.rows

    def to_dense(self):
        H = np.zeros((self.rows, self.cols), dtype=np.uint8)
        H[self.check_idx, self.var_idx] = 1
        return H

    @classmethod
    def from_dense(cls, H):
        H = np.asarray(H)
        checks, vars_ = np.nonzero(H)
        return cls(H.shape[0], H.shape[1], np.stack([checks, vars_], axis=1))


def load_alist(text: str) -> ParityCheckMatrix:
    """Parse conventional alist text (1-based indices, zero padding)."""
    lines = text.splitlines()
    tokens_per_line = []
    for i, raw in enumerate(lines):
        stripped = raw.strip()
        if not stripped:
            tokens_per_line.append((i + 1, []))
            continue
        try:
            tokens_per_line.append((i + 1, [int(t) for t in stripped.split()]))
        except ValueError:
            raise AlistError(f"non-integer token in {stripped!r}", line=i + 1)
    # Drop trailing blank lines but keep positions for error reporting.
    rows_of_ints = [(ln, t) for ln, t in tokens_per_line if t]
    if len(rows_of_ints) < 4:
        raise AlistError("alist requires at least 4 non-empty lines")
    ln, dims = rows_of_ints[0]
    if len(dims) != 2:
        raise AlistError("malformed dimension line, expected 'cols rows'", line=ln)
    cols, rows = dims
    if cols <= 0 or rows <= 0:
        raise AlistError("dimensions must be positive", line=ln)
    ln, maxdeg = rows_of_ints[1]
    if len(maxdeg) != 2:
        raise AlistError("expected 'max_col_degree max_row_degree'", line=ln)
    ln_cd, col_degs = rows_of_ints[2]
    if len(col_degs) != cols:
        raise AlistError(f"expected {cols} column degrees, got {len(col_degs)}", line=ln_cd)
    ln_rd, row_degs = rows_of_ints[3]
    if len(row_degs) != rows:
        raise AlistError(f"expected {rows} row degrees, got {len(row_degs)}", line=ln_rd)

    body = rows_of_ints[4:]
    if len(body) < cols + rows:
        raise AlistError(
            f"expected {cols} column lists and {rows} row lists, got {len(body)} lines"
        )
    entries = []
    for j in range(cols):
        ln, idxs = body[j]
        idxs = [x for x in idxs if x != 0]
        if len(idxs) != col_degs[j]:
            raise AlistError(
                f"column {j + 1} degree mismatch: header says {col_degs[j]}, "
                f"found {len(idxs)}",
                line=ln,
            )
        for x in idxs:
            if not (1 <= x <= rows):
                raise AlistError(f"index out of range: {x} (rows={rows})", line=ln)
            entries.append((x - 1, j))
    # Row lists are redundant; validate them against the column lists.
    entry_set = {(c, v) for c, v in entries}
    for i in range(rows):
        ln, idxs = body[cols + i]
        idxs = [x for x in idxs if x != 0]
        if len(idxs) != row_degs[i]:
            raise AlistError(
                f"row {i + 1} degree mismatch: header says {row_degs[i]}, "
                f"found {len(idxs)}",
                line=ln,
            )
        for x in idxs:
            if not (1 <= x <= cols):
                raise AlistError(f"index out of range: {x} (cols={cols})", line=ln)
            if (i, x - 1) not in entry_set:
                raise AlistError(
                    f"row list entry ({i + 1},{x}) missing from column lists", line=ln
                )
    return ParityCheckMatrix(rows, cols, np.array(entries, dtype=np.int32))


def dump_alist(H: ParityCheckMatrix) -> str:
    """Serialize to alist text; round-trips through load_alist."""
    col_lists = [[] for _ in range(H.cols)]
    row_lists = [[] for _ in range(H.rows)]
    for c, v in H.entries:
        col_lists[v].append(int(c) + 1)
        row_lists[c].append(int(v) + 1)
    for lst in col_lists:
        lst.sort()
    for lst in row_lists:
        lst.sort()
    max_cd = int(H.column_degrees.max())
    max_rd = int(H.row_degrees.max())
    out = [f"{H.cols} {H.rows}", f"{max_cd} {max_rd}"]
    out.append(" ".join(str(d) for d in H.column_degrees))
    out.append(" ".join(str(d) for d in H.row_degrees))
    for lst in col_lists:
        padded = lst + [0] * (max_cd - len(lst))
        out.append(" ".join(str(x) for x in padded))
    for lst in row_lists:
        padded = lst + [0] * (max_rd - len(lst))
        out.append(" ".join(str(x) for x in padded))
    return "\n".join(out) + "\n"


def syndrome(bits, H: ParityCheckMatrix):
    """Parity of `bits` on the support of each check (GF(2) product H.c).

    Accepts a vector of length cols or a batch (n, cols).
    """
    bits = np.asarray(bits)
    if bits.shape[-1] != H.cols:
        raise ValueError(f"bits length {bits.shape[-1]} != cols {H.cols}")
    order = np.argsort(H.check_idx, kind="stable")
    starts = np.searchsorted(H.check_idx[order], np.arange(H.rows))
    gathered = bits[..., H.var_idx[order]].astype(np.int64)
    acc = np.add.reduceat(gathered, starts, axis=-1)
    return (acc % 2).astype(np.uint8)


class Encoder:
    """Systematic encoder built from H by GF(2) Gaussian elimination.

    For matrices whose parity part is lower triangular (e.g. the built-in
    long quasi-cyclic code), a fast back-substitution path is used instead.
    Rank-deficient H is handled by dropping dependent checks and adjusting
    the rate; `rate_adjusted` flags that case.
    """

    def __init__(self, H: ParityCheckMatrix):
        self.H = H
        self.rate_adjusted = False
        self.effective_rank = H.rows
        self._fast_parity = None
        if self._try_lower_triangular():
            self.info_positions = np.arange(H.cols - H.rows)
            self.parity_positions = np.arange(H.cols - H.rows, H.cols)
            return
        self._build_gauss()

    def _try_lower_triangular(self):
        """Detect H = [A | T] with T lower triangular with unit diagonal."""
        H = self.H
        k = H.cols - H.rows
        parity_mask = H.var_idx >= k
        pc = H.check_idx[parity_mask]
        pv = H.var_idx[parity_mask] - k
        if np.any(pv > pc):
            return False
        if np.bincount(pc[pv == pc], minlength=H.rows).min() != 1:
            return False
        # Sparse A columns for parity computation.
        a_mask = ~parity_mask
        self._a_check = H.check_idx[a_mask]
        self._a_var = H.var_idx[a_mask]
        # Strictly-lower parity entries: p contribution of earlier parities.
        strict = pv < pc
        self._t_check = pc[strict]
        self._t_var = pv[strict]
        # Back substitution is only O(E) when T is bidiagonal (t_var == t_check-1);
        # fall back to generic Gauss otherwise unless rows are small.
        if strict.sum() and not np.all(self._t_var == self._t_check - 1):
            return False
        self._fast_parity = True
        return True

    def _build_gauss(self):
        H = self.H
        A = self.H.to_dense().astype(np.uint8)
        m, n = A.shape
        pivots = []
        r = 0
        for col in range(n):
            if r >= m:
                break
            sub = np.nonzero(A[r:, col])[0]
            if sub.size == 0:
                continue
            pr = r + sub[0]
            if pr != r:
                A[[r, pr]] = A[[pr, r]]
            elim = np.nonzero(A[:, col])[0]
            elim = elim[elim != r]
            A[elim] ^= A[r]
            pivots.append(col)
            r += 1
        self.effective_rank = r
        if r < m:
            self.rate_adjusted = True
        pivots = np.array(pivots, dtype=np.int64)
        free = np.setdiff1d(np.arange(n), pivots)
        # Systematic positions are the free columns; pivot bits are determined
        # by them: for reduced row i, bits[pivots[i]] = sum over free cols of A[i, free].
        self.info_positions = free
        self.parity_positions = pivots
        self._parity_map = A[:r][:, free]  # shape (rank, n_free), GF(2)

    def encode(self, info_bits):
        H = self.H
        info_bits = np.asarray(info_bits).astype(np.uint8) % 2
        k = self.info_positions.size
        if info_bits.size != k:
            raise ValueError(f"info length {info_bits.size} != {k}")
        c = np.zeros(H.cols, dtype=np.uint8)
        if self._fast_parity:
            c[: H.cols - H.rows] = info_bits
            t = np.bincount(
                self._a_check, weights=info_bits[self._a_var].astype(np.float64),
                minlength=H.rows,
            ).astype(np.int64)
            if self._t_check.size:
                # Bidiagonal accumulator: p_i = p_{i-1} xor t_i.
                p = np.cumsum(t) % 2
            else:
                p = t % 2
            c[H.cols - H.rows:] = p.astype(np.uint8)
        else:
            c[self.info_positions] = info_bits
            parity = (self._parity_map @ info_bits) % 2
            c[self.parity_positions] = parity.astype(np.uint8)
        return c

    def extract_info(self, bits):
        return np.asarray(bits)[self.info_positions]


def encode(info_bits, H: ParityCheckMatrix):
    """One-shot systematic encode; builds the Encoder each call."""
    return Encoder(H).encode(info_bits)


def _phi(x):
    x = np.maximum(x, _PHI_EPS)
    return -np.log(np.tanh(np.minimum(x, LLR_CLAMP) / 2.0) + 1e-300)


def decode_bp(llrs, H: ParityCheckMatrix, max_iters=50, damping=0.5):
    """Flooding sum-product decoding of LLRs (positive => bit 0).

    Accepts a single LLR vector of length cols or a batch (n, cols).
    Returns (bits, converged, iters_used) with matching leading shape.
    Check-to-variable messages are damped (new = (1-d) new + d old), which
    stabilizes flooding on short dense graphs; d=0 disables it.
    """
    llrs = np.asarray(llrs, dtype=np.float64)
    single = llrs.ndim == 1
    L = llrs[None, :] if single else llrs
    if L.shape[1] != H.cols:
        raise ValueError(f"LLR length {L.shape[1]} != cols {H.cols}")
    if max_iters < 1:
        raise ValueError("max_iters must be >= 1")
    if not np.all(np.isfinite(L)):
        raise ValueError("LLRs must be finite")
    nb = L.shape[0]
    ci, vi = H.check_idx, H.var_idx
    order = np.lexsort((vi, ci))
    ci, vi = ci[order], vi[order]
    L = np.clip(L, -LLR_CLAMP, LLR_CLAMP)

    # Segment boundaries for per-check reductions (edges sorted by check)
    # and a second edge ordering for per-variable reductions.
    row_starts = np.searchsorted(ci, np.arange(H.rows))
    by_var = np.argsort(vi, kind="stable")
    col_starts = np.searchsorted(vi[by_var], np.arange(H.cols))
    syn_starts = np.searchsorted(H.check_idx[np.argsort(H.check_idx, kind="stable")],
                                 np.arange(H.rows))
    syn_order = np.argsort(H.check_idx, kind="stable")
    syn_vars = H.var_idx[syn_order]

    msg_vc = L[:, vi].copy()  # variable->check messages, one per edge
    cv_prev = np.zeros_like(msg_vc)
    bits = np.zeros((nb, H.cols), dtype=np.uint8)
    converged = np.zeros(nb, dtype=bool)
    iters_used = np.full(nb, max_iters, dtype=np.int64)
    active = np.arange(nb)

    for it in range(1, max_iters + 1):
        m = msg_vc[active]
        # Check update: sign product and phi-sum with self-exclusion.
        neg = (m < 0).astype(np.int64)
        neg_tot = np.add.reduceat(neg, row_starts, axis=1)
        phi_m = _phi(np.abs(m))
        phi_tot = np.add.reduceat(phi_m, row_starts, axis=1)
        sgn_out = np.where((neg_tot[:, ci] - neg) % 2 == 1, -1.0, 1.0)
        mag_out = _phi(np.maximum(phi_tot[:, ci] - phi_m, _PHI_EPS))
        cv = np.clip(sgn_out * mag_out, -LLR_CLAMP, LLR_CLAMP)
        if damping > 0:
            cv = (1.0 - damping) * cv + damping * cv_prev[active]
        cv_prev[active] = cv
        # Variable update: posterior minus own incoming message.
        tot = np.add.reduceat(cv[:, by_var], col_starts, axis=1)
        post = L[active] + tot
        msg_vc[active] = np.clip(post[:, vi] - cv, -LLR_CLAMP, LLR_CLAMP)
        hard = (post < 0).astype(np.uint8)
        bits[active] = hard
        syn = np.add.reduceat(hard[:, syn_vars].astype(np.int64), syn_starts, axis=1) % 2
        # Bits with (numerically) zero posterior are undecided; do not
        # declare convergence on pure ties, e.g. an all-zero LLR input.
        ok = (syn == 0).all(axis=1) & (np.abs(post) > 1e-9).all(axis=1)
        newly = active[ok]
        converged[newly] = True
        iters_used[newly] = it
        active = active[~ok]
        if active.size == 0:
            break

    if single:
        return bits[0], bool(converged[0]), int(iters_used[0])
    return bits, converged, iters_used


# --- Built-in codes -------------------------------------------------------

# IEEE 802.11n rate-1/2, codeword length 648, circulant size 27.
# -1 denotes an all-zero block; other entries are cyclic shifts of I_27.
_WIFI_648_PROTO = [
    [0, -1, -1, -1, 0, 0, -1, -1, 0, -1, -1, 0, 1, 0, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1],
    [22, 0, -1, -1, 17, -1, 0, 0, 12, -1, -1, -1, -1, 0, 0, -1, -1, -1, -1, -1, -1, -1, -1, -1],
    [6, -1, 0, -1, 10, -1, -1, -1, 24, -1, 0, -1, -1, -1, 0, 0, -1, -1, -1, -1, -1, -1, -1, -1],
    [2, -1, -1, 0, 20, -1, -1, -1, 25, 0, -1, -1, -1, -1, -1, 0, 0, -1, -1, -1, -1, -1, -1, -1],
    [23, -1, -1, -1, 3, -1, -1, -1, 0, -1, 9, 11, -1, -1, -1, -1, 0, 0, -1, -1, -1, -1, -1, -1],
    [24, -1, 23, 1, 17, -1, 3, -1, 10, -1, -1, -1, -1, -1, -1, -1, -1, 0, 0, -1, -1, -1, -1, -1],
    [25, -1, -1, -1, 8, -1, -1, -1, 7, 18, -1, -1, 0, -1, -1, -1, -1, -1, 0, 0, -1, -1, -1, -1],
    [13, 24, -1, -1, 0, -1, 8, -1, 6, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1, 0, 0, -1, -1, -1],
    [7, 20, -1, 16, 22, 10, -1, -1, 23, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1, 0, 0, -1, -1],
    [11, -1, -1, -1, 19, -1, -1, -1, 13, -1, 3, 17, -1, -1, -1, -1, -1, -1, -1, -1, -1, 0, 0, -1],
    [25, -1, 8, -1, 23, 18, -1, 14, 9, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1, 0, 0],
    [3, -1, -1, -1, 16, -1, -1, 2, 25, 5, -1, -1, 1, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1, 0],
]


def expand_prototype(proto, z):
    """Expand a QC prototype (shift values, -1 = zero block) into entries."""
    entries = []
    for bi, row in enumerate(proto):
        for bj, shift in enumerate(row):
            if shift < 0:
                continue
            for r in range(z):
                entries.append((bi * z + r, bj * z + (r + shift) % z))
    proto_rows = len(proto)
    proto_cols = len(proto[0])
    return ParityCheckMatrix(proto_rows * z, proto_cols * z,
                             np.array(entries, dtype=np.int32))


def wifi_648() -> ParityCheckMatrix:
    """802.11n rate-1/2 length-648 code (circulant size 27)."""
    return expand_prototype(_WIFI_648_PROTO, 27)


def long_qc_64800(seed=0) -> ParityCheckMatrix:
    """Rate-1/2, length-64800 quasi-cyclic stand-in for the DVB-S2 code.

    H = [A | T]: A has column degree 3 built from random circulants,
    T is a bidiagonal accumulator, giving O(E) encoding.
    """
    z = 360
    k_blocks = 90  # 90 * 360 = 32400 info bits
    m_blocks = 90
    rng = np.random.default_rng(seed)
    entries = []
    for bj in range(k_blocks):
        rows_chosen = rng.choice(m_blocks, size=3, replace=False)
        for bi in rows_chosen:
            shift = int(rng.integers(z))
            for r in range(z):
                entries.append((bi * z + r, bj * z + (r + shift) % z))
    m = m_blocks * z
    k = k_blocks * z
    for i in range(m):
        entries.append((i, k + i))
        if i > 0:
            entries.append((i, k + i - 1))
    return ParityCheckMatrix(m, k + m, np.array(entries, dtype=np.int32))


BUILTIN_CODES = {
    "wifi-648": wifi_648,
    "qc-64800": long_qc_64800,
}


def get_code(code_id: str) -> ParityCheckMatrix:
    if code_id in BUILTIN_CODES:
        return BUILTIN_CODES[code_id]()
    with open(code_id, "r") as f:
        return load_alist(f.read())
