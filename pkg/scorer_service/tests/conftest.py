import pytest
from fastapi.testclient import TestClient

from service_helpers import HttpBackend
from scorer_service.app import create_app


@pytest.fixture
def client():
    with TestClient(create_app()) as c:
        yield c


@pytest.fixture
def backend(client):
    return HttpBackend(client)
