"""Run-registry engine and session management."""

from pathlib import Path
from typing import Generator, Optional

from sqlalchemy import create_engine
from sqlalchemy.orm import Session, sessionmaker

from quantum_dynamo.db.models import Base
from quantum_dynamo.settings import settings


class RegistryConfig:
    """Registry connection management."""

    def __init__(self, database_url: Optional[str] = None):
        """Initialize the registry connection.

        Args:
            database_url: SQLAlchemy URL. If None, uses settings.registry_url.
        """
        if database_url is None:
            database_url = settings.registry_url
        if database_url.startswith("sqlite:///") and database_url != "sqlite:///:memory:":
            Path(database_url[len("sqlite:///") :]).parent.mkdir(parents=True, exist_ok=True)

        self.engine = create_engine(database_url, echo=settings.sql_echo)
        self.SessionLocal = sessionmaker(autocommit=False, autoflush=False, bind=self.engine)

    def create_tables(self):
        """Create all registry tables."""
        Base.metadata.create_all(bind=self.engine)

    def drop_tables(self):
        """Drop all registry tables."""
        Base.metadata.drop_all(bind=self.engine)

    def get_session(self) -> Generator[Session, None, None]:
        """Get a registry session.

        Yields:
            Session: SQLAlchemy session
        """
        session = self.SessionLocal()
        try:
            yield session
        finally:
            session.close()
