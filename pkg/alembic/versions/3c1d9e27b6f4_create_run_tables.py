"""Create experiment run tables

Revision ID: 3c1d9e27b6f4
Revises: 
Create Date: 2026-10-17 09:12:40.214307

"""
from typing import Sequence, Union

from alembic import op
import sqlalchemy as sa


# revision identifiers, used by Alembic.
revision: str = '3c1d9e27b6f4'
down_revision: Union[str, Sequence[str], None] = None
branch_labels: Union[str, Sequence[str], None] = None
depends_on: Union[str, Sequence[str], None] = None


def upgrade() -> None:
    """Upgrade schema."""
    op.create_table('experiment_runs',
    sa.Column('id', sa.String(length=36), nullable=False),
    sa.Column('created_at', sa.DateTime(), nullable=False),
    sa.Column('config_digest', sa.String(length=64), nullable=False),
    sa.Column('master_seed', sa.BigInteger(), nullable=False),
    sa.Column('config_json', sa.Text(), nullable=False),
    sa.Column('versions_json', sa.Text(), nullable=False),
    sa.Column('curve_csv_path', sa.String(length=1024), nullable=True),
    sa.PrimaryKeyConstraint('id')
    )
    op.create_index('ix_experiment_runs_config_digest', 'experiment_runs', ['config_digest'], unique=False)
    op.create_table('curve_points',
    sa.Column('id', sa.Integer(), autoincrement=True, nullable=False),
    sa.Column('run_id', sa.String(length=36), nullable=False),
    sa.Column('eb_nb_db', sa.Float(), nullable=False),
    sa.Column('threshold_mode', sa.String(length=8), nullable=False),
    sa.Column('packets_sent', sa.Integer(), nullable=False),
    sa.Column('packets_ok', sa.Integer(), nullable=False),
    sa.Column('packets_dropped', sa.Integer(), nullable=False),
    sa.Column('per', sa.Float(), nullable=True),
    sa.Column('hallucinations', sa.Integer(), nullable=False),
    sa.Column('ci_low', sa.Float(), nullable=True),
    sa.Column('ci_high', sa.Float(), nullable=True),
    sa.ForeignKeyConstraint(['run_id'], ['experiment_runs.id'], ondelete='CASCADE'),
    sa.PrimaryKeyConstraint('id')
    )
    op.create_index('ix_curve_points_run_id', 'curve_points', ['run_id'], unique=False)


def downgrade() -> None:
    """Downgrade schema."""
    op.drop_index('ix_curve_points_run_id', table_name='curve_points')
    op.drop_table('curve_points')
    op.drop_index('ix_experiment_runs_config_digest', table_name='experiment_runs')
    op.drop_table('experiment_runs')
