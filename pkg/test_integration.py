"""
Service tests: drive the FastAPI app in-process through TestClient.
"""

import math

import pytest
from fastapi.testclient import TestClient

import certificate_api
from hypext.experiments import triangle_instance


@pytest.fixture
def client():
    certificate_api.db.runs.clear()
    with TestClient(certificate_api.app) as test_client:
        yield test_client


def _triangle_request(**extra):
    pmap, xi = triangle_instance(2.0, 0.9)
    body = {'dimension': 2, 'declared_C': 0.9, 'sources': pmap.sources.tolist(),
            'targets': pmap.targets.tolist(), 'xi': xi.coords.tolist()}
    body.update(extra)
    return body


def test_health_check(client):
    response = client.get('/')
    assert response.status_code == 200
    data = response.json()
    assert data['status'] == 'ok'
    assert data['stats'] == {'runs': 0, 'solves': 0, 'bounds': 0}


def test_bounds(client):
    response = client.get('/api/bounds', params={'c': 0.5})
    assert response.status_code == 200
    data = response.json()
    assert 0.5 < data['c_star'] < 1.0
    assert data['delta'] == pytest.approx(math.log(2.0))
    assert data['c_star'] == max(data['c_hat'], data['arcsinh_value'])


@pytest.mark.parametrize('c', [0.0, 1.0, 2.0, -0.5])
def test_bounds_rejects_non_contractions(client, c):
    assert client.get('/api/bounds', params={'c': c}).status_code == 422


def test_parameters(client):
    data = client.get('/api/parameters', params={'c': 0.5}).json()
    assert data['C'] == 0.5
    assert data['epsilon'] < data['epsilon0']
    assert data['R'] > 1.0
    assert data['solver']['tol'] == 1e-8


def test_solve_one_point(client):
    response = client.post('/api/solve-one-point', json=_triangle_request())
    assert response.status_code == 200
    data = response.json()
    assert data['certificate']['passed']
    assert sorted(data['active_indices']) == [0, 1, 2]
    assert data['c_xi'] > 0.9
    assert data['run_id'] == 1


def test_solve_accepts_solver_options(client):
    response = client.post('/api/solve-one-point', json=_triangle_request(tol=1e-10, max_iters=5000))
    assert response.status_code == 200
    assert response.json()['converged'] in (True, False)


def test_solve_rejects_shape_mismatch(client):
    body = _triangle_request()
    body['xi'] = [1.0, 0.0]
    assert client.post('/api/solve-one-point', json=body).status_code == 422


def test_solve_rejects_off_hyperboloid_point(client):
    body = _triangle_request()
    body['xi'] = [2.0, 0.0, 0.0]
    response = client.post('/api/solve-one-point', json=body)
    assert response.status_code == 400
    assert 'hyperboloid' in response.json()['detail']


def test_solve_rejects_map_above_declared_constant(client):
    body = _triangle_request(declared_C=0.5)
    assert client.post('/api/solve-one-point', json=body).status_code == 400


def test_runs_are_recorded(client):
    client.get('/api/bounds', params={'c': 0.3})
    client.post('/api/solve-one-point', json=_triangle_request())
    assert len(client.get('/api/runs').json()) == 2
    (run,) = client.get('/api/runs', params={'kind': 'bounds'}).json()
    assert run['request'] == {'c': 0.3}
    assert client.get('/').json()['stats'] == {'runs': 2, 'solves': 1, 'bounds': 1}
