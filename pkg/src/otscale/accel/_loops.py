"""Loop-form kernels shared by both backends.

Functions here are written in a numba-compilable subset of Python
(arrays, scalars, explicit loops). The numpy backend runs them as-is;
the numba backend wraps them with @njit. Keeping one source avoids the
two paths drifting apart.
"""

import numpy as np


def transport_solve(cost, supplies, demands, max_iter):
    """Exact solver for the balanced transportation problem.

    Primal network simplex on the dense bipartite transportation graph:
    northwest-corner initial basis, most-negative-reduced-cost pivoting
    with a switch to Bland's rule after a fixed number of iterations to
    rule out degenerate cycling.

    cost: (m, n) float64, supplies: (m,), demands: (n,), both summing to
    the same total mass. Returns (basis_rows, basis_cols, basis_flows,
    value, row_duals, col_duals, status) where status 0 means optimal and
    1 means the iteration cap was hit.
    """
    m = cost.shape[0]
    n = cost.shape[1]
    n_basic = m + n - 1
    n_nodes = m + n

    basis_rows = np.empty(n_basic, np.int64)
    basis_cols = np.empty(n_basic, np.int64)
    basis_flow = np.empty(n_basic, np.float64)

    # Northwest-corner starting basis; ties produce zero-flow basic cells.
    rem_a = supplies.copy()
    rem_b = demands.copy()
    i = 0
    j = 0
    for t in range(n_basic):
        q = rem_a[i] if rem_a[i] < rem_b[j] else rem_b[j]
        basis_rows[t] = i
        basis_cols[t] = j
        basis_flow[t] = q
        rem_a[i] -= q
        rem_b[j] -= q
        if t == n_basic - 1:
            break
        if i == m - 1:
            j += 1
        elif j == n - 1:
            i += 1
        elif rem_a[i] <= rem_b[j]:
            i += 1
        else:
            j += 1

    row_duals = np.zeros(m, np.float64)
    col_duals = np.zeros(n, np.float64)

    # Scratch space. Nodes 0..m-1 are rows, m..m+n-1 are columns.
    offsets = np.empty(n_nodes + 1, np.int64)
    fill = np.empty(n_nodes, np.int64)
    incident = np.empty(2 * n_basic, np.int64)
    queue = np.empty(n_nodes, np.int64)
    visited = np.empty(n_nodes, np.uint8)
    parent_node = np.empty(n_nodes, np.int64)
    parent_cell = np.empty(n_nodes, np.int64)
    path_cells = np.empty(n_nodes, np.int64)

    cmax = 0.0
    for a in range(m):
        for b in range(n):
            if cost[a, b] > cmax:
                cmax = cost[a, b]
    tol = 1e-10 * (1.0 + cmax)
    bland_after = 50 * (n_nodes + 1)

    status = 1
    it = 0
    while it < max_iter:
        it += 1

        # Incidence lists of the current basis tree (counting sort).
        for a in range(n_nodes + 1):
            offsets[a] = 0
        for t in range(n_basic):
            offsets[basis_rows[t] + 1] += 1
            offsets[m + basis_cols[t] + 1] += 1
        for a in range(n_nodes):
            offsets[a + 1] += offsets[a]
            fill[a] = offsets[a]
        for t in range(n_basic):
            a = basis_rows[t]
            incident[fill[a]] = t
            fill[a] += 1
            a = m + basis_cols[t]
            incident[fill[a]] = t
            fill[a] += 1

        # Dual potentials: u[i] + v[j] = c[i, j] on basic cells.
        for a in range(n_nodes):
            visited[a] = 0
        row_duals[0] = 0.0
        visited[0] = 1
        queue[0] = 0
        q_head = 0
        q_tail = 1
        while q_head < q_tail:
            node = queue[q_head]
            q_head += 1
            for s in range(offsets[node], offsets[node + 1]):
                t = incident[s]
                if node < m:
                    other = m + basis_cols[t]
                else:
                    other = basis_rows[t]
                if visited[other] == 0:
                    if node < m:
                        col_duals[basis_cols[t]] = cost[basis_rows[t], basis_cols[t]] - row_duals[node]
                    else:
                        row_duals[basis_rows[t]] = cost[basis_rows[t], basis_cols[t]] - col_duals[node - m]
                    visited[other] = 1
                    queue[q_tail] = other
                    q_tail += 1

        # Entering cell: Dantzig rule early, Bland's rule past the switch.
        use_bland = it > bland_after
        enter_i = -1
        enter_j = -1
        best = -tol
        for a in range(m):
            ua = row_duals[a]
            for b in range(n):
                rc = cost[a, b] - ua - col_duals[b]
                if rc < -tol:
                    if use_bland:
                        enter_i = a
                        enter_j = b
                        break
                    if rc < best:
                        best = rc
                        enter_i = a
                        enter_j = b
            if use_bland and enter_i >= 0:
                break
        if enter_i < 0:
            status = 0
            break

        # Unique tree path from the entering row node to its column node.
        for a in range(n_nodes):
            visited[a] = 0
        target = m + enter_j
        visited[enter_i] = 1
        parent_node[enter_i] = -1
        parent_cell[enter_i] = -1
        queue[0] = enter_i
        q_head = 0
        q_tail = 1
        while q_head < q_tail:
            node = queue[q_head]
            q_head += 1
            if node == target:
                break
            for s in range(offsets[node], offsets[node + 1]):
                t = incident[s]
                if node < m:
                    other = m + basis_cols[t]
                else:
                    other = basis_rows[t]
                if visited[other] == 0:
                    visited[other] = 1
                    parent_node[other] = node
                    parent_cell[other] = t
                    queue[q_tail] = other
                    q_tail += 1

        n_path = 0
        node = target
        while node != enter_i:
            path_cells[n_path] = parent_cell[node]
            n_path += 1
            node = parent_node[node]

        # Cycle signs: entering cell is '+', walking back from the column
        # node the path cells alternate '-', '+', '-', ...
        theta = np.inf
        leave_t = -1
        for s in range(0, n_path, 2):
            t = path_cells[s]
            f = basis_flow[t]
            if f < theta:
                theta = f
                leave_t = t
            elif f == theta:
                # Deterministic anti-cycling tie-break: smallest (row, col).
                if basis_rows[t] < basis_rows[leave_t] or (
                    basis_rows[t] == basis_rows[leave_t]
                    and basis_cols[t] < basis_cols[leave_t]
                ):
                    leave_t = t

        for s in range(n_path):
            t = path_cells[s]
            if s % 2 == 0:
                basis_flow[t] -= theta
            else:
                basis_flow[t] += theta
        basis_rows[leave_t] = enter_i
        basis_cols[leave_t] = enter_j
        basis_flow[leave_t] = theta

    value = 0.0
    for t in range(n_basic):
        value += basis_flow[t] * cost[basis_rows[t], basis_cols[t]]
    return basis_rows, basis_cols, basis_flow, value, row_duals, col_duals, status


def transport_pairwise(centroids, masses, counts, dim, row_start, row_stop, row_step, max_iter, out):
    """Fill rows [row_start:row_stop:row_step] of the upper triangle of `out`
    with optimal-transport costs between padded signatures.

    centroids: (N, K, F) padded centroid stacks, masses: (N, K) padded mass
    vectors, counts: (N,) valid lengths, dim: number of active feature
    dimensions. Returns the number of solves that hit the iteration cap.
    """
    n_sig = counts.shape[0]
    failures = 0
    for i in range(row_start, row_stop, row_step):
        ki = counts[i]
        for j in range(i + 1, n_sig):
            kj = counts[j]
            cost = np.empty((ki, kj), np.float64)
            for p in range(ki):
                for q in range(kj):
                    s = 0.0
                    for f in range(dim):
                        d = centroids[i, p, f] - centroids[j, q, f]
                        s += d * d
                    cost[p, q] = s
            res = transport_solve(cost, masses[i, :ki].copy(), masses[j, :kj].copy(), max_iter)
            out[i, j] = res[3]
            failures += res[6]
    return failures


def enforce_connectivity(labels, min_size):
    """Relabel a grid segmentation so every final label is 4-connected.

    Flood-fills components in scan order; a component smaller than
    min_size is absorbed into the already-relabeled neighbor adjacent to
    its first pixel. Returns (new_labels, n_labels).
    """
    h = labels.shape[0]
    w = labels.shape[1]
    out = np.full((h, w), -1, np.int64)
    queue_y = np.empty(h * w, np.int64)
    queue_x = np.empty(h * w, np.int64)
    next_label = 0
    for start_y in range(h):
        for start_x in range(w):
            if out[start_y, start_x] >= 0:
                continue
            old = labels[start_y, start_x]
            adjacent = -1
            if start_x > 0:
                adjacent = out[start_y, start_x - 1]
            if adjacent < 0 and start_y > 0:
                adjacent = out[start_y - 1, start_x]

            out[start_y, start_x] = next_label
            queue_y[0] = start_y
            queue_x[0] = start_x
            q_head = 0
            q_tail = 1
            while q_head < q_tail:
                y = queue_y[q_head]
                x = queue_x[q_head]
                q_head += 1
                if y > 0 and out[y - 1, x] < 0 and labels[y - 1, x] == old:
                    out[y - 1, x] = next_label
                    queue_y[q_tail] = y - 1
                    queue_x[q_tail] = x
                    q_tail += 1
                if y < h - 1 and out[y + 1, x] < 0 and labels[y + 1, x] == old:
                    out[y + 1, x] = next_label
                    queue_y[q_tail] = y + 1
                    queue_x[q_tail] = x
                    q_tail += 1
                if x > 0 and out[y, x - 1] < 0 and labels[y, x - 1] == old:
                    out[y, x - 1] = next_label
                    queue_y[q_tail] = y
                    queue_x[q_tail] = x - 1
                    q_tail += 1
                if x < w - 1 and out[y, x + 1] < 0 and labels[y, x + 1] == old:
                    out[y, x + 1] = next_label
                    queue_y[q_tail] = y
                    queue_x[q_tail] = x + 1
                    q_tail += 1

            if q_tail < min_size and adjacent >= 0:
                for t in range(q_tail):
                    out[queue_y[t], queue_x[t]] = adjacent
            else:
                next_label += 1
    return out, next_label
