"""
Unit-quaternion algebra.

Quaternions are numpy arrays stored as [v1, v2, v3, w] (vector part first).
All functions are pure and work on fixed sizes only.
"""
import numpy as np

IDENTITY = np.array([0.0, 0.0, 0.0, 1.0])


def skew(x: np.ndarray) -> np.ndarray:
    """Cross-product matrix: skew(x) @ y == cross(x, y)."""
    return np.array([
        [0.0, -x[2], x[1]],
        [x[2], 0.0, -x[0]],
        [-x[1], x[0], 0.0],
    ])


def skew_batch(X: np.ndarray) -> np.ndarray:
    """skew() applied to every row of a (k, 3) array, returning (k, 3, 3)."""
    out = np.zeros((X.shape[0], 3, 3))
    out[:, 0, 1] = -X[:, 2]
    out[:, 0, 2] = X[:, 1]
    out[:, 1, 0] = X[:, 2]
    out[:, 1, 2] = -X[:, 0]
    out[:, 2, 0] = -X[:, 1]
    out[:, 2, 1] = X[:, 0]
    return out


def normalize(q: np.ndarray) -> np.ndarray:
    return q / np.linalg.norm(q)


def conjugate(q: np.ndarray) -> np.ndarray:
    return np.array([-q[0], -q[1], -q[2], q[3]])


def quat_multiply(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Hamilton product a (x) b in [v, w] storage."""
    av, aw = a[:3], a[3]
    bv, bw = b[:3], b[3]
    v = aw * bv + bw * av + np.cross(av, bv)
    w = aw * bw - av @ bv
    return normalize(np.append(v, w))


def quat_error(q: np.ndarray, q_r: np.ndarray) -> np.ndarray:
    """Error quaternion q_e = q_r^-1 (x) q.

    Component form:
        q_ev = q_r4 q_v - q_4 q_rv + S(q_v) q_rv
        q_e4 = q_r4 q_4 + q_rv . q_v
    """
    qv, q4 = q[:3], q[3]
    rv, r4 = q_r[:3], q_r[3]
    v = r4 * qv - q4 * rv + np.cross(qv, rv)
    w = r4 * q4 + rv @ qv
    return normalize(np.append(v, w))


def rotmat(q: np.ndarray) -> np.ndarray:
    """Rotation matrix C(q) = (w^2 - v.v) I + 2 v v^T - 2 w S(v).

    For q_e this maps reference-frame vectors into the body frame, and
    rotmat(a (x) b) == rotmat(b) @ rotmat(a).
    """
    v, w = q[:3], q[3]
    return (w * w - v @ v) * np.eye(3) + 2.0 * np.outer(v, v) - 2.0 * w * skew(v)


def kinematics_matrix(q: np.ndarray) -> np.ndarray:
    """Q(q) = 1/2 (S(q_v) + q_4 I), so that q_v' = Q(q) omega."""
    return 0.5 * (skew(q[:3]) + q[3] * np.eye(3))


def quat_derivative(q: np.ndarray, omega: np.ndarray) -> np.ndarray:
    """Attitude kinematics: [Q(q) omega ; -1/2 q_v . omega]."""
    return np.append(kinematics_matrix(q) @ omega, -0.5 * q[:3] @ omega)


def random_unit_quaternion(rng: np.random.Generator) -> np.ndarray:
    return normalize(rng.standard_normal(4))
