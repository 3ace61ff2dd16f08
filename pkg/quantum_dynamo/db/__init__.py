"""Run registry for quantum_dynamo."""

from .crud import RunCRUD
from .database import RegistryConfig
from .models import Base, RunOutput, RunRecord

__all__ = ["Base", "RegistryConfig", "RunCRUD", "RunOutput", "RunRecord"]
