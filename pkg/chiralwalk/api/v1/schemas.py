from typing import List

from pydantic import BaseModel, Field


class ExperimentInfo(BaseModel):
    """One runnable experiment"""

    name: str
    description: str
    http: bool = Field(..., description="Whether the experiment can be run through this API")
    parameters: List[str]


class ExperimentListResponse(BaseModel):
    """Response from the experiment listing endpoint"""

    status: str
    experiments: List[ExperimentInfo]
    count: int


class ErrorResponse(BaseModel):
    """Error response format"""

    status: str = "error"
    detail: str
