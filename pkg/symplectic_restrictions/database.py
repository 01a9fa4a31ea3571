"""Report store: produced reports, kept in sqlite through SQLAlchemy."""

import json
import logging
import os
from datetime import datetime, timezone
from typing import List, Optional

from sqlalchemy import Column, DateTime, Integer, String, Text, create_engine
from sqlalchemy.orm import declarative_base, sessionmaker
from sqlalchemy.pool import StaticPool

# Load environment variables from .env file
from dotenv import load_dotenv
load_dotenv()

logger = logging.getLogger(__name__)

Base = declarative_base()


def get_utc_now():
    """Get current UTC time."""
    return datetime.now(timezone.utc)


class ReportModel(Base):
    """SQLAlchemy model for stored reports."""
    __tablename__ = 'reports'

    id = Column(Integer, primary_key=True, autoincrement=True)
    command = Column(String(32), nullable=False, index=True)
    family = Column(String(64))
    seed = Column(Integer)
    exit_code = Column(Integer, default=0)
    payload = Column(Text, nullable=False)
    created_at = Column(DateTime, default=get_utc_now)

    def as_dict(self) -> dict:
        return {
            "id": self.id,
            "command": self.command,
            "family": self.family,
            "seed": self.seed,
            "exit_code": self.exit_code,
            "created_at": self.created_at.isoformat() if self.created_at else None,
            "report": json.loads(self.payload),
        }


class DatabaseManager:
    """Database connection and session management."""

    def __init__(self, db_path: str = None):
        self.engine = None
        self.SessionLocal = None
        self.setup_database(db_path)

    def setup_database(self, db_path: str = None):
        """Setup the connection; tests get a private in-memory database."""
        testing = os.getenv("TESTING", "false").lower() == "true"
        db_path = (db_path or os.getenv('REPORT_DB_PATH', 'restrictions.db')).strip()
        if testing and db_path == 'restrictions.db':
            db_path = ':memory:'

        if db_path == ':memory:':
            self.engine = create_engine(
                "sqlite://", echo=False, connect_args={"check_same_thread": False}, poolclass=StaticPool
            )
            logger.info("report store: in-memory sqlite")
        else:
            self.engine = create_engine(f"sqlite:///{db_path}", echo=False)
            logger.info("report store: sqlite at %s", db_path)
        self.SessionLocal = sessionmaker(bind=self.engine)

        # Create tables
        Base.metadata.create_all(bind=self.engine)

    def get_session(self):
        """Get database session."""
        return self.SessionLocal()

    def save_report(self, report) -> int:
        """Store a Report; returns its id."""
        command = report.command.get("name", "")
        family = report.command.get("germ") or report.command.get("family")
        with self.get_session() as session:
            row = ReportModel(
                command=command,
                family=family,
                seed=report.bounds.get("seed"),
                exit_code=report.exit_code,
                payload=report.to_json(),
            )
            session.add(row)
            session.commit()
            logger.debug("stored %s report %d", command, row.id)
            return row.id

    def list_reports(self, command: str = None, limit: int = 50) -> List[dict]:
        with self.get_session() as session:
            query = session.query(ReportModel)
            if command:
                query = query.filter(ReportModel.command == command)
            rows = query.order_by(ReportModel.id.desc()).limit(limit).all()
            return [row.as_dict() for row in rows]

    def get_report(self, report_id: int) -> Optional[dict]:
        with self.get_session() as session:
            row = session.get(ReportModel, report_id)
            return row.as_dict() if row else None

    def close(self):
        """Close database connection."""
        if self.engine:
            self.engine.dispose()


_manager: Optional[DatabaseManager] = None


def get_db_manager() -> DatabaseManager:
    """The process-wide manager, created on first use."""
    global _manager
    if _manager is None:
        _manager = DatabaseManager()
    return _manager
